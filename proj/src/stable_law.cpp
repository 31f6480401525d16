#include "heavytail/stable_law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <quadmath.h>

#include "heavytail/errors.hpp"
#include "heavytail/quadrature.hpp"
#include "heavytail/statistics.hpp"

namespace ht {

namespace {

// Quad precision keeps the alternating series usable well past the point
// where double or extended sums lose every digit to cancellation.
constexpr double kQuadEpsilon = 1.93e-34;

}  // namespace

StableLaw::StableLaw(double beta, SeriesOptions series) : beta_(beta), series_(series) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("StableLaw: beta must lie in (0, 1)");
  if (series_.max_terms < 2) throw std::invalid_argument("StableLaw: series term cap must be at least 2");
  if (!(series_.abs_tol > 0.0)) throw std::invalid_argument("StableLaw: series tolerance must be positive");
  laplace_scale_ = std::tgamma(1.0 - beta_);
  sampler_scale_ = std::pow(laplace_scale_, 1.0 / beta_);

  const __float128 b = beta_;
  const __float128 pi = acosq(-1);
  const __float128 log_c = logq(tgammaq(1 - b));
  coef_.resize(static_cast<std::size_t>(series_.max_terms));
  sign_sin_.resize(coef_.size());
  for (std::size_t i = 0; i < coef_.size(); ++i) {
    const __float128 n = static_cast<__float128>(i + 1);
    coef_[i] = expq(lgammaq(n * b + 1) - lgammaq(n + 1) + n * log_c - logq(pi * b));
    const __float128 sign = (i % 2 == 0) ? 1 : -1;
    sign_sin_[i] = sign * sinq(pi * fmodq(n * b, 2));
  }
  power_limit_ = compute_power_limit();
}

double StableLaw::laplace_transform(double x) const {
  if (x < 0.0) throw std::invalid_argument("laplace_transform: x must be nonnegative");
  if (x == 0.0) return 1.0;
  return std::exp(-laplace_scale_ * std::pow(x, beta_));
}

double StableLaw::sample(RandomStream& rng) const {
  // Kanter's representation: (A(U)/E)^{(1-beta)/beta} has Laplace transform exp(-s^beta).
  const double phi = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  const double b = beta_;
  const double log_a = (b / (1.0 - b)) * std::log(std::sin(b * phi)) + std::log(std::sin((1.0 - b) * phi)) -
                       (1.0 / (1.0 - b)) * std::log(std::sin(phi));
  return sampler_scale_ * std::exp(((1.0 - b) / b) * (log_a - std::log(e)));
}

void StableLaw::sample_into(RandomStream& rng, std::span<double> out) const {
  for (double& s : out) s = sample(rng);
}

SeriesValue StableLaw::power_density_series(double u) const {
  if (u < 0.0) throw std::invalid_argument("power_density_series: u must be nonnegative");
  if (u == 0.0) return {1.0, 0.0, 1};
  const __float128 uq = u;
  const __float128 stop = 1e-3 * series_.abs_tol;
  __float128 sum = 0, abs_sum = 0, upow = 1, prev_env = 0;
  int terms = 0;
  bool converged = false;
  for (std::size_t i = 0; i < coef_.size(); ++i) {
    const __float128 env = coef_[i] * upow;
    sum += sign_sin_[i] * env;
    abs_sum += env;
    terms = static_cast<int>(i + 1);
    if (i > 0 && env < prev_env && env < stop) {
      converged = true;
      break;
    }
    prev_env = env;
    upow *= uq;
  }
  SeriesValue out;
  out.value = static_cast<double>(sum);
  out.rounding_error = 64.0 * kQuadEpsilon * static_cast<double>(abs_sum);
  out.terms = converged ? terms : -terms;
  return out;
}

double StableLaw::power_density(double u) const {
  const SeriesValue sv = power_density_series(u);
  if (sv.terms < 0 || sv.rounding_error > series_.abs_tol) {
    throw NonConvergence("power_density: series budget exceeded at u=" + std::to_string(u), sv.value);
  }
  return std::max(sv.value, 0.0);
}

double StableLaw::density(double x) const {
  if (!(x > 0.0)) throw std::invalid_argument("density: x must be positive");
  const double jac = beta_ * std::pow(x, -beta_ - 1.0);
  const double u = std::pow(x, -beta_);
  const SeriesValue sv = power_density_series(u);
  if (sv.terms < 0 || sv.rounding_error * jac > series_.abs_tol) {
    throw NonConvergence("density: series budget exceeded at x=" + std::to_string(x), sv.value * jac);
  }
  return std::max(sv.value, 0.0) * jac;
}

double StableLaw::compute_power_limit() const {
  auto ok = [this](double u) {
    const SeriesValue sv = power_density_series(u);
    return sv.terms > 0 && sv.rounding_error <= series_.abs_tol;
  };
  double lo = 0.0, hi = 1.0;
  while (ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) return lo;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

double StableLaw::log_weighted_laplace(double p, double rho) const {
  if (!(p > 0.0) || !(rho >= 0.0)) throw std::invalid_argument("log_weighted_laplace: need p > 0, rho >= 0");
  const double c = laplace_scale_, b = beta_;
  // In v = log w the integrand exp(phi(v)) is log-concave with a single mode.
  auto phi = [&](double v) { return p * v - rho * std::exp(v) - c * std::exp(b * v); };
  auto dphi = [&](double v) { return p - rho * std::exp(v) - c * b * std::exp(b * v); };

  double v_hi = std::log(p / (c * b)) / b;
  if (rho > 0.0) v_hi = std::min(v_hi, std::log(p / rho));
  double v_lo = v_hi - 1.0 - std::log(2.0) / b;
  while (dphi(v_lo) <= 0.0) v_lo -= 2.0 * (v_hi - v_lo);
  while (dphi(v_hi) > 0.0) v_hi += 1.0;
  std::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(dphi, v_lo, v_hi, boost::math::tools::eps_tolerance<double>(50), iters);
  const double mode = 0.5 * (bracket.first + bracket.second);
  const double peak = phi(mode);

  constexpr double kDrop = 46.0;
  double step = std::max(1.0 / p, 0.25);
  double left = mode - step;
  while (phi(left) > peak - kDrop) {
    step *= 2.0;
    left = mode - step;
  }
  step = 0.25;
  double right = mode + step;
  while (phi(right) > peak - kDrop) {
    step *= 2.0;
    right = mode + step;
  }
  auto f = [&](double v) { return std::exp(phi(v) - peak); };
  const double mass = integrate(f, left, mode, 1e-13).value + integrate(f, mode, right, 1e-13).value;
  return peak + std::log(mass);
}

double StableLaw::neg_moment(double eta) const {
  if (!(eta > 0.0)) throw std::invalid_argument("neg_moment: eta must be positive");
  return std::exp(log_weighted_laplace(eta, 0.0) - std::lgamma(eta));
}

double StableLaw::truncated_beta_moment(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("truncated_beta_moment: t must be positive");
  const double upper = power_limit_;
  const double lower = std::pow(t, -beta_);
  if (lower >= upper) return 0.0;
  // Split geometrically so the 1/u factor near small u stays resolved.
  double total = 0.0;
  double a = lower;
  while (a < upper) {
    const double b = std::min(upper, std::max(2.0 * a, a + 1e-3));
    total += integrate([this](double u) { return power_density(u) / u; }, a, b, 1e-11).value;
    a = b;
  }
  return total;
}

PoissonWeights poisson_weights_from_arrivals(double alpha, std::span<const double> arrivals) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("poisson weights: alpha must lie in (0, 2)");
  PoissonWeights w;
  w.points.reserve(arrivals.size());
  const double expo = -2.0 / alpha;
  for (double x : arrivals) w.points.push_back(std::pow(x, expo));
  return w;
}

double poisson_tail_mass(double alpha, std::size_t k) {
  const double q = 2.0 / alpha;
  return std::pow(static_cast<double>(k), 1.0 - q) / (q - 1.0);
}

LePageReport lepage_reduce(double alpha, std::size_t truncation, const NonnegativeLaw& y_law,
                           std::size_t n_samples, std::uint64_t seed) {
  if (truncation < 1 || n_samples < 2) throw std::invalid_argument("lepage_reduce: need K >= 1 and n >= 2");
  const StableLaw law = StableLaw::from_alpha(alpha);
  RandomStream sum_stream(substream_seed(seed, 0));
  RandomStream ref_stream(substream_seed(seed, 1));
  LePageReport rep;
  rep.scale = std::pow(y_law.beta_moment, 1.0 / law.beta());
  rep.tail_mass = poisson_tail_mass(alpha, truncation);
  rep.samples = n_samples;
  rep.truncation = truncation;

  const double expo = -2.0 / alpha;
  std::vector<double> sums(n_samples), refs(n_samples);
  double y_total = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    double x = 0.0, total = 0.0;
    for (std::size_t k = 0; k < truncation; ++k) {
      x += sum_stream.exponential();
      const double y = y_law.sample(sum_stream);
      y_total += y;
      total += std::pow(x, expo) * y;
    }
    sums[i] = total;
    refs[i] = rep.scale * law.sample(ref_stream);
  }
  const double shift = rep.tail_mass * y_total / static_cast<double>(n_samples * truncation);
  std::vector<double> shifted(sums);
  for (double& v : shifted) v += shift;
  rep.compensated_ks_statistic = ks_two_sample(std::move(shifted), refs);
  rep.ks_statistic = ks_two_sample(std::move(sums), std::move(refs));
  rep.ks_threshold = ks_critical_value(0.01, n_samples, n_samples);
  return rep;
}

}  // namespace ht
