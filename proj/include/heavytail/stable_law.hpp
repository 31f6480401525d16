#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "heavytail/random.hpp"

namespace ht {

struct SeriesOptions {
  int max_terms = 200;
  double abs_tol = 1e-12;
};

struct SeriesValue {
  double value = 0.0;
  // Bound on the accumulated rounding error of the alternating sum.
  double rounding_error = 0.0;
  int terms = 0;
};

// One-sided beta-stable law with Laplace transform exp(-Gamma(1-beta) x^beta).
class StableLaw {
 public:
  explicit StableLaw(double beta, SeriesOptions series = {});
  static StableLaw from_alpha(double alpha, SeriesOptions series = {}) { return StableLaw(alpha / 2.0, series); }

  double beta() const noexcept { return beta_; }
  double laplace_scale() const noexcept { return laplace_scale_; }
  const SeriesOptions& series_options() const noexcept { return series_; }

  double laplace_transform(double x) const;
  double sample(RandomStream& rng) const;
  void sample_into(RandomStream& rng, std::span<double> out) const;

  // Density of S at x > 0. Throws NonConvergence when the series cannot reach
  // the absolute tolerance within the term cap (x close to 0).
  double density(double x) const;
  // Density of U = S^{-beta} at u >= 0. The series in u is entire and p(0) = 1.
  double power_density(double u) const;
  SeriesValue power_density_series(double u) const;
  // Largest u for which power_density meets the absolute tolerance.
  double power_density_limit() const noexcept { return power_limit_; }

  // E[S^{-eta}] by quadrature of its Laplace-transform representation.
  double neg_moment(double eta) const;
  // log of the integral over (0, inf) of w^{p-1} exp(-rho w - Gamma(1-beta) w^beta);
  // p > 0, rho >= 0.
  double log_weighted_laplace(double p, double rho) const;

  // E[S^beta 1{S <= t}], integrating the power density on [t^{-beta}, limit].
  double truncated_beta_moment(double t) const;

 private:
  double beta_;
  double laplace_scale_;
  double sampler_scale_;
  SeriesOptions series_;
  double compute_power_limit() const;

  double power_limit_ = 0.0;
  std::vector<__float128> coef_;      // Gamma(n beta + 1) c^n / (n! pi beta)
  std::vector<__float128> sign_sin_;  // (-1)^{n-1} sin(pi n beta)
};

struct PoissonWeights {
  std::vector<double> points;  // strictly decreasing
  std::size_t truncation_count() const noexcept { return points.size(); }
};

// Weights x_k^{-2/alpha} of given Poisson arrival times.
PoissonWeights poisson_weights_from_arrivals(double alpha, std::span<const double> arrivals);

template <class Source>
concept ExponentialSource = requires(Source& s) {
  { s.exponential() } -> std::convertible_to<double>;
};

// First K points x_k^{-2/alpha} of a unit-rate Poisson process on (0, inf).
template <ExponentialSource Source>
PoissonWeights sample_poisson_weights(double alpha, std::size_t k, Source& source) {
  std::vector<double> arrivals(k);
  double x = 0.0;
  for (auto& a : arrivals) {
    x += source.exponential();
    a = x;
  }
  return poisson_weights_from_arrivals(alpha, arrivals);
}

// Expected total of the weights beyond the K-th, K^{1-2/alpha} / (2/alpha - 1).
double poisson_tail_mass(double alpha, std::size_t k);

struct NonnegativeLaw {
  std::function<double(RandomStream&)> sample;
  double beta_moment;  // E[Y^beta]
};

struct LePageReport {
  double ks_statistic = 0.0;
  double ks_threshold = 0.0;  // two-sample critical value at the 1% level
  double scale = 0.0;         // E[Y^beta]^{1/beta}
  double tail_mass = 0.0;     // expected weight mass dropped by truncation
  // Diagnostic only: KS after adding tail_mass times the sample mean of Y to every sum.
  double compensated_ks_statistic = 0.0;
  std::size_t samples = 0;
  std::size_t truncation = 0;
};

// Compares sum_{k<=K} xi_k Y_k against E[Y^beta]^{1/beta} S by two-sample KS.
LePageReport lepage_reduce(double alpha, std::size_t truncation, const NonnegativeLaw& y_law,
                           std::size_t n_samples, std::uint64_t seed);

}  // namespace ht
