#include "heavytail/rde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "heavytail/csv.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/quadrature.hpp"
#include "heavytail/random.hpp"

namespace ht {

GEvaluator GEvaluator::monte_carlo(double beta, std::size_t samples, std::uint64_t seed) {
  if (samples < 10000) throw std::invalid_argument("GEvaluator: Monte Carlo mode needs at least 1e4 samples");
  GEvaluator ev(StableLaw(beta), GMode::monte_carlo);
  ev.s_.resize(samples);
  ev.s_prime_.resize(samples);
  RandomStream first(substream_seed(seed, 0)), second(substream_seed(seed, 1));
  ev.law_.sample_into(first, ev.s_);
  ev.law_.sample_into(second, ev.s_prime_);
  return ev;
}

GEvaluator GEvaluator::quadrature(double beta, QuadratureOptions options) {
  if (options.uniform_panels < 1 || options.geometric_levels < 0) {
    throw std::invalid_argument("GEvaluator: bad quadrature panel counts");
  }
  GEvaluator ev(StableLaw(beta, SeriesOptions{options.series_terms, 1e-12}), GMode::quadrature);
  const double limit = ev.law_.power_density_limit();
  const double first = limit / options.uniform_panels;
  std::vector<double> breaks{0.0};
  for (int k = options.geometric_levels; k >= 1; --k) breaks.push_back(std::ldexp(first, -k));
  for (int j = 1; j <= options.uniform_panels; ++j) breaks.push_back(limit * j / options.uniform_panels);
  const NodeSet rule = composite_gauss_legendre(breaks);
  ev.covered_mass_ = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const double w = rule.weights[i] * ev.law_.power_density(u);
    ev.covered_mass_ += w;
    if (w <= 0.0) continue;
    ev.s_.push_back(std::pow(u, -1.0 / beta));
    ev.weight_.push_back(w);
  }
  return ev;
}

template <class F>
Estimate GEvaluator::mc_mean(F&& f) const {
  const std::size_t n = s_.size();
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = f(s_[i], s_prime_[i]);
    sum += v;
    sum_sq += v * v;
  }
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = std::max(0.0, (sum_sq - nn * mean * mean) / (nn - 1.0));
  return {mean, std::sqrt(var / nn)};
}

template <class F>
Estimate GEvaluator::quad_mean(F&& outer) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < s_.size(); ++i) sum += weight_[i] * outer(s_[i]);
  return {sum, 0.0};
}

double GEvaluator::log_inner(int m, double gamma, double log_gamma_fn, double p, double q) const {
  // E[S'^m e^{-x S'}] is the m-th derivative of the Laplace transform, and
  // (P + Q S')^{-gamma} is a Gamma-weighted average of such exponentials.
  const double b = law_.beta();
  const double power = (m == 0) ? gamma : gamma + b - 1.0;
  const double pref = (m == 0) ? 0.0 : std::log(law_.laplace_scale() * b);
  return pref - gamma * std::log(q) - log_gamma_fn + law_.log_weighted_laplace(power, p / q);
}

Estimate GEvaluator::g(double y, double r, double t) const {
  if (!(y > 0.0) || r < 0.0 || t < 0.0) throw std::invalid_argument("g: need y > 0, r >= 0, t >= 0");
  const double b = beta();
  if (mode_ == GMode::monte_carlo) {
    return mc_mean([&](double s, double sp) { return std::pow((t / y + s) / (r + (t + y * s) * (t + y * sp)), b); });
  }
  const double lg = boost::math::lgamma(b);
  return quad_mean([&](double s) {
    const double lead = t + y * s;
    return std::pow(t / y + s, b) * std::exp(log_inner(0, b, lg, r + t * lead, y * lead));
  });
}

Estimate GEvaluator::dg_dy(double y, double r) const {
  const double b = beta();
  if (mode_ == GMode::monte_carlo) {
    return mc_mean([&](double s, double sp) {
      return -2.0 * b * y * std::pow(s, b + 1.0) * sp * std::pow(r + y * y * s * sp, -b - 1.0);
    });
  }
  const double lg = boost::math::lgamma(b + 1.0);
  return quad_mean([&](double s) {
    return -2.0 * b * y * std::pow(s, b + 1.0) * std::exp(log_inner(1, b + 1.0, lg, r, y * y * s));
  });
}

Estimate GEvaluator::dg_dr(double y, double r) const {
  const double b = beta();
  if (mode_ == GMode::monte_carlo) {
    return mc_mean([&](double s, double sp) { return -b * std::pow(s, b) * std::pow(r + y * y * s * sp, -b - 1.0); });
  }
  const double lg = boost::math::lgamma(b + 1.0);
  return quad_mean([&](double s) { return -b * std::pow(s, b) * std::exp(log_inner(0, b + 1.0, lg, r, y * y * s)); });
}

Estimate GEvaluator::density_kernel(double y, double r) const {
  if (mode_ == GMode::monte_carlo) {
    return mc_mean([&](double s, double sp) {
      const double d = r + y * y * s * sp;
      return s * sp / (d * d);
    });
  }
  return quad_mean([&](double s) { return s * std::exp(log_inner(1, 2.0, 0.0, r, y * y * s)); });
}

Estimate GEvaluator::h_mean(double y, double r, double t) const {
  if (mode_ == GMode::monte_carlo) {
    return mc_mean([&](double s, double sp) { return (t + y * s) / (r + (t + y * s) * (t + y * sp)); });
  }
  return quad_mean([&](double s) {
    const double lead = t + y * s;
    return lead * std::exp(log_inner(0, 1.0, 0.0, r + t * lead, y * lead));
  });
}

Estimate GEvaluator::product_kernel(double t) const {
  if (mode_ == GMode::monte_carlo) {
    return mc_mean([&](double s, double sp) {
      const double d = t + s * sp;
      return s * sp / (d * d);
    });
  }
  return quad_mean([&](double s) { return s * std::exp(log_inner(1, 2.0, 0.0, t, s)); });
}

bool GEvaluator::decreasing_on(std::span<const double> ys, double r, double t) const {
  double prev = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double v = g(ys[i], r, t).value;
    if (i > 0 && !(v < prev)) return false;
    prev = v;
  }
  return true;
}

RdeSolution solve_y_star(const GEvaluator& ev, double r, double t, const SolveOptions& options) {
  if (r < 0.0 || t < 0.0) throw std::invalid_argument("solve_y_star: need r >= 0 and t >= 0");
  const double tol = options.tolerance > 0.0
                         ? options.tolerance
                         : (ev.mode() == GMode::monte_carlo ? kMcSolveTolerance : kQuadratureSolveTolerance);
  // log G is decreasing in log y.
  auto phi = [&](double log_y) { return std::log(ev.g(std::exp(log_y), r, t).value); };
  const double floor = std::log(1e-12), ceil = std::log(1e12), widen = std::log(100.0);
  double lo = std::log(1e-6), hi = std::log(1e3);
  double phi_lo = phi(lo), phi_hi = phi(hi);
  while (!(phi_lo > 0.0)) {
    if (lo <= floor) throw BracketFailure("solve_y_star: G stays below 1 down to y = 1e-12");
    hi = lo;
    phi_hi = phi_lo;
    lo = std::max(floor, lo - widen);
    phi_lo = phi(lo);
  }
  while (!(phi_hi < 0.0)) {
    if (hi >= ceil) throw BracketFailure("solve_y_star: G stays above 1 up to y = 1e12");
    lo = hi;
    phi_lo = phi_hi;
    hi = std::min(ceil, hi + widen);
    phi_hi = phi(hi);
  }
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(phi, lo, hi, phi_lo, phi_hi,
                                                      boost::math::tools::eps_tolerance<double>(50), iters);
  RdeSolution sol;
  sol.r = r;
  sol.t = t;
  sol.y_star = std::exp(0.5 * (root.first + root.second));
  sol.residual = std::abs(ev.g(sol.y_star, r, t).value - 1.0);
  if (!(sol.residual <= tol)) {
    throw NonConvergence("solve_y_star: residual " + std::to_string(sol.residual) + " above tolerance", sol.y_star);
  }
  return sol;
}

DerivativeCheck y_star_prime(const GEvaluator& ev, double r, double y_star, bool check) {
  if (r < 0.0) throw std::invalid_argument("y_star_prime: r must be nonnegative");
  const double y = y_star > 0.0 ? y_star : solve_y_star(ev, r, 0.0).y_star;
  DerivativeCheck out;
  out.analytic = -ev.dg_dr(y, r).value / ev.dg_dy(y, r).value;
  if (!check) return out;

  auto ys = [&](double rr) { return solve_y_star(ev, rr, 0.0).y_star; };
  auto stencil = [&](double h) {
    if (r >= 2.0 * h) return (-ys(r + 2 * h) + 8 * ys(r + h) - 8 * ys(r - h) + ys(r - 2 * h)) / (12.0 * h);
    return (-25 * y + 48 * ys(r + h) - 36 * ys(r + 2 * h) + 16 * ys(r + 3 * h) - 3 * ys(r + 4 * h)) / (12.0 * h);
  };
  // Shrink the step until two successive stencils agree; y_* can bend sharply near r = 0 for small alpha.
  double h = 1e-2 * std::max(1.0, r);
  if (out.analytic != 0.0) h = std::min(h, 0.05 * y / std::abs(out.analytic));
  double prev = stencil(h);
  for (int k = 0; k < 10; ++k) {
    h *= 0.25;
    const double cur = stencil(h);
    const bool settled = std::abs(cur - prev) <= 5e-3 * std::abs(cur);
    prev = cur;
    if (settled) break;
  }
  out.finite_difference = prev;
  out.relative_gap = std::abs(out.analytic - out.finite_difference) / std::abs(out.analytic);
  if (out.relative_gap > 0.10) {
    throw DiagnosticsError("y_star_prime: analytic and finite-difference slopes disagree at r=" + std::to_string(r),
                           out.analytic, out.finite_difference);
  }
  return out;
}

RdeSolution density_mu(const GEvaluator& ev, double r, const SolveOptions& options) {
  RdeSolution sol = solve_y_star(ev, r, 0.0, options);
  const DerivativeCheck d = y_star_prime(ev, r, sol.y_star, options.check_derivative);
  sol.y_prime = d.analytic;
  sol.y_prime_fd = d.finite_difference;
  sol.derivative_warning = options.check_derivative && d.relative_gap > 0.03;
  const double y = sol.y_star;
  const double value = (y * y - 2.0 * r * y * sol.y_prime) * ev.density_kernel(y, r).value / std::numbers::pi;
  sol.clamped = value < 0.0;
  sol.density = std::max(0.0, value);
  return sol;
}

std::vector<RdeSolution> density_profile(const GEvaluator& ev, std::span<const double> radii,
                                         const SolveOptions& options, unsigned workers) {
  std::vector<RdeSolution> out(radii.size());
  parallel_for(radii.size(), workers, [&](std::size_t i) { out[i] = density_mu(ev, radii[i] * radii[i], options); });
  return out;
}

void write_density_profile_csv(std::span<const RdeSolution> rows, const std::filesystem::path& path) {
  CsvWriter out(path, {"abs_z", "r", "y_star", "y_prime", "density"});
  for (const auto& s : rows) out.row({std::sqrt(s.r), s.r, s.y_star, s.y_prime, s.density});
}

TailReport tail_shape_report(const GEvaluator& ev, std::span<const double> radii, unsigned workers) {
  TailReport rep;
  if (radii.empty()) return rep;
  std::vector<double> sorted(radii.begin(), radii.end());
  std::sort(sorted.begin(), sorted.end());
  const double alpha = 2.0 * ev.beta();
  const auto profile = density_profile(ev, sorted, {}, workers);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double x = sorted[i];
    TailRow row;
    row.radius = x;
    row.density = profile[i].density;
    row.asymptote = std::pow(x, 2.0 * (alpha - 1.0)) * std::exp(-0.5 * alpha * std::pow(x, alpha));
    row.log_ratio = std::log(row.density) - std::log(row.asymptote);
    row.corrected_asymptote = std::pow(x, 2.0 * (alpha - 1.0)) * std::exp(-std::pow(x, alpha));
    row.corrected_log_ratio = std::log(row.density) - std::log(row.corrected_asymptote);
    rep.rows.push_back(row);
  }
  const std::size_t first = rep.rows.size() > 3 ? rep.rows.size() - 3 : 0;
  auto spread = [&](double TailRow::*field) {
    double lo = rep.rows[first].*field, hi = lo;
    for (std::size_t i = first; i < rep.rows.size(); ++i) {
      lo = std::min(lo, rep.rows[i].*field);
      hi = std::max(hi, rep.rows[i].*field);
    }
    return hi - lo;
  };
  rep.flatness = spread(&TailRow::log_ratio);
  rep.corrected_flatness = spread(&TailRow::corrected_log_ratio);
  return rep;
}

std::complex<double> stieltjes_limit(const GEvaluator& ev, std::complex<double> z, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("stieltjes_limit: t must be positive");
  const double r = std::norm(z);
  const double y = solve_y_star(ev, r, t).y_star;
  return {0.0, ev.h_mean(y, r, t).value};
}

double y_star_origin(double beta) {
  return std::pow(std::tgamma(1.0 - beta) * std::tgamma(1.0 + beta), -1.0 / (2.0 * beta));
}

double density_origin(double beta) {
  const double num = std::pow(std::tgamma(1.0 + 1.0 / beta), 2.0) * std::pow(std::tgamma(1.0 + beta), 1.0 / beta);
  return num / (std::numbers::pi * std::pow(std::tgamma(1.0 - beta), 1.0 / beta));
}

}  // namespace ht
