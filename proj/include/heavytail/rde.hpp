#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "heavytail/stable_law.hpp"
#include "heavytail/statistics.hpp"

namespace ht {

enum class GMode { monte_carlo, quadrature };

struct QuadratureOptions {
  int series_terms = 600;     // term cap of the stable density series
  int uniform_panels = 16;    // Gauss-Legendre panels across [0, u_limit]
  int geometric_levels = 44;  // dyadic refinement of the first panel toward u = 0
};

// Expectations over two independent copies S, S' of the one-sided
// beta-stable law. Monte Carlo mode reuses one array of pairs for every
// call; quadrature mode integrates S against its series density and S'
// through its Laplace transform.
class GEvaluator {
 public:
  static GEvaluator monte_carlo(double beta, std::size_t samples, std::uint64_t seed);
  static GEvaluator quadrature(double beta, QuadratureOptions options = {});

  double beta() const noexcept { return law_.beta(); }
  GMode mode() const noexcept { return mode_; }
  const StableLaw& law() const noexcept { return law_; }
  std::size_t size() const noexcept { return s_.size(); }
  // Outer mass covered by the quadrature nodes (1 in Monte Carlo mode).
  double covered_mass() const noexcept { return covered_mass_; }

  // G(y, r, t) = E[((t/y + S) / (r + (t + yS)(t + yS')))^beta].
  Estimate g(double y, double r, double t) const;
  // Partial derivatives of G at t = 0.
  Estimate dg_dy(double y, double r) const;
  Estimate dg_dr(double y, double r) const;
  // E[S S' / (r + y^2 S S')^2].
  Estimate density_kernel(double y, double r) const;
  // E[(t + yS) / (r + (t + yS)(t + yS'))].
  Estimate h_mean(double y, double r, double t) const;
  // E[S S' / (t + S S')^2].
  Estimate product_kernel(double t) const;

  // True if G strictly decreases along the sorted y grid.
  bool decreasing_on(std::span<const double> ys, double r, double t) const;

 private:
  GEvaluator(StableLaw law, GMode mode) : law_(std::move(law)), mode_(mode) {}

  template <class F>
  Estimate mc_mean(F&& f) const;
  template <class F>
  Estimate quad_mean(F&& outer) const;
  // log E[S'^m (P + Q S')^{-gamma}].
  double log_inner(int m, double gamma, double log_gamma_fn, double p, double q) const;

  StableLaw law_;
  GMode mode_;
  double covered_mass_ = 1.0;
  std::vector<double> s_;        // Monte Carlo S_i, or quadrature nodes in S
  std::vector<double> s_prime_;  // Monte Carlo S'_i
  std::vector<double> weight_;   // quadrature weights
};

struct SolveOptions {
  double tolerance = 0.0;  // |G - 1| target; 0 selects the mode default
  bool check_derivative = true;
};

struct RdeSolution {
  double r = 0.0;
  double t = 0.0;
  double y_star = 0.0;
  double y_prime = 0.0;
  double y_prime_fd = 0.0;  // finite-difference cross-check
  double density = 0.0;
  double residual = 0.0;
  bool derivative_warning = false;  // analytic and finite-difference slopes differ by > 3%
  bool clamped = false;             // negative density estimate clamped to 0
};

inline constexpr double kMcSolveTolerance = 1e-10;
inline constexpr double kQuadratureSolveTolerance = 1e-10;

// Root in y of G(y, r, t) = 1. Throws BracketFailure if G does not cross 1 on [1e-12, 1e12].
RdeSolution solve_y_star(const GEvaluator& ev, double r, double t, const SolveOptions& options = {});

struct DerivativeCheck {
  double analytic = 0.0;
  double finite_difference = 0.0;
  double relative_gap = 0.0;
};

// dy_*/dr at t = 0 as -dG/dr / dG/dy, cross-checked by a five-point stencil of
// solve_y_star (forward at small r since G needs r >= 0). Throws DiagnosticsError
// if the two disagree by more than 10%.
DerivativeCheck y_star_prime(const GEvaluator& ev, double r, double y_star = 0.0, bool check = true);

// Limiting density of the eigenvalue measure at |z|^2 = r.
RdeSolution density_mu(const GEvaluator& ev, double r, const SolveOptions& options = {});
std::vector<RdeSolution> density_profile(const GEvaluator& ev, std::span<const double> radii,
                                         const SolveOptions& options = {}, unsigned workers = 1);
void write_density_profile_csv(std::span<const RdeSolution> rows, const std::filesystem::path& path);

struct TailRow {
  double radius = 0.0;
  double density = 0.0;
  double asymptote = 0.0;  // |z|^{2(alpha-1)} exp(-(alpha/2)|z|^alpha)
  double log_ratio = 0.0;
  // Same with exp(-|z|^alpha): carrying E[S^beta 1{S <= t}] ~ beta ln t through
  // the large-r expansion of y_* gives y_* ~ sqrt(r) exp(-r^beta / (2 beta)).
  double corrected_asymptote = 0.0;
  double corrected_log_ratio = 0.0;
};

struct TailReport {
  std::vector<TailRow> rows;
  double flatness = 0.0;  // max pairwise gap of log_ratio over the largest three radii
  double corrected_flatness = 0.0;
};

TailReport tail_shape_report(const GEvaluator& ev, std::span<const double> radii, unsigned workers = 1);

// Limiting Stieltjes transform of the symmetrized singular value law of A - z at eta = it.
std::complex<double> stieltjes_limit(const GEvaluator& ev, std::complex<double> z, double t);

// Closed forms at the origin, used for calibration.
double y_star_origin(double beta);
double density_origin(double beta);

}  // namespace ht
