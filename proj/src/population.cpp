#include "heavytail/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Core>
#include <boost/random/exponential_distribution.hpp>

#include "heavytail/csv.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/random.hpp"

namespace ht {

namespace {

constexpr std::size_t kBlock = 1024;

template <class T>
T pairwise_impl(std::span<const T> v) {
  if (v.size() <= 16) {
    T s{};
    for (const T& x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_impl(v.first(half)) + pairwise_impl(v.subspan(half));
}

void check_params(const PopulationParams& p) {
  if (!(p.alpha > 0.0 && p.alpha < 2.0)) throw std::invalid_argument("population: alpha must lie in (0, 2)");
  if (p.truncation < 1) throw std::invalid_argument("population: truncation must be at least 1");
}

// Draws the first K points of a Lambda_alpha Poisson process as u_k^{-2/alpha}
// for unit-rate arrivals u_k. Returns the conditional mean of the dropped mass.
class WeightSampler {
 public:
  WeightSampler(double alpha, std::size_t k) : exponent_(-2.0 / alpha), arrivals_(static_cast<Eigen::Index>(k)) {}

  double draw(RandomStream& rng, Eigen::ArrayXd& weights) {
    double x = 0.0;
    for (Eigen::Index i = 0; i < arrivals_.size(); ++i) {
      x += exp_(rng);
      arrivals_[i] = x;
    }
    weights = (exponent_ * arrivals_.log()).exp();
    return std::pow(x, 1.0 + exponent_) / (-exponent_ - 1.0);
  }

 private:
  double exponent_;
  Eigen::ArrayXd arrivals_;
  boost::random::exponential_distribution<double> exp_;
};

template <class T>
T resampled_sum(RandomStream& rng, const Eigen::ArrayXd& weights, const std::vector<T>& pool) {
  T s{};
  const auto n = static_cast<std::uint64_t>(pool.size());
  for (Eigen::Index i = 0; i < weights.size(); ++i) s += weights[i] * pool[rng.index(n)];
  return s;
}

template <class Pop, class Map>
Pop sweep(const Pop& pop, std::uint64_t seed, unsigned workers, Map&& map) {
  check_params(pop.params);
  if (pop.values.size() < kMinPopulation) throw std::invalid_argument("population: at least 1000 members required");
  using T = typename decltype(pop.values)::value_type;
  const T tail_mean = pop.params.tail_compensation ? pop.mean() : T{};
  Pop next{pop.params, std::vector<T>(pop.values.size()), pop.iteration + 1};
  const std::size_t blocks = (pop.values.size() + kBlock - 1) / kBlock;
  const std::uint64_t step_seed = substream_seed(seed, static_cast<std::uint64_t>(pop.iteration));
  parallel_for(blocks, workers, [&](std::size_t b) {
    RandomStream rng(substream_seed(step_seed, b));
    WeightSampler sampler(pop.params.alpha, pop.params.truncation);
    Eigen::ArrayXd w;
    const std::size_t end = std::min(pop.values.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      T sums[2];
      for (T& s : sums) {
        const double tail = sampler.draw(rng, w);
        s = resampled_sum(rng, w, pop.values) + tail * tail_mean;
      }
      next.values[i] = map(sums[0], sums[1]);
    }
  });
  return next;
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return pairwise_impl(v); }
cplx pairwise_sum(std::span<const cplx> v) { return pairwise_impl(v); }

double HPopulation::beta_moment() const {
  const double b = params.alpha / 2.0;
  std::vector<double> p(values.size());
  std::transform(values.begin(), values.end(), p.begin(), [b](double h) { return std::pow(h, b); });
  return pairwise_sum(p) / static_cast<double>(p.size());
}

double HPopulation::mean() const { return pairwise_sum(values) / static_cast<double>(values.size()); }

cplx APopulation::mean() const { return pairwise_sum(values) / static_cast<double>(values.size()); }

double APopulation::imag_beta_moment() const {
  const double b = params.alpha / 2.0;
  std::vector<double> p(values.size());
  std::transform(values.begin(), values.end(), p.begin(), [b](cplx a) { return std::pow(std::max(0.0, a.imag()), b); });
  return pairwise_sum(p) / static_cast<double>(p.size());
}

HPopulation population_step_h(const HPopulation& pop, std::uint64_t seed, unsigned workers) {
  if (pop.params.t < 0.0) throw std::invalid_argument("population_step_h: t must be nonnegative");
  const double t = pop.params.t;
  const double r = std::norm(pop.params.z);
  return sweep(pop, seed, workers, [t, r](double s1, double s2) {
    const double lead = t + s1;
    const double denom = r + lead * (t + s2);
    return denom > 0.0 ? lead / denom : 0.0;
  });
}

APopulation population_step_a(const APopulation& pop, std::uint64_t seed, unsigned workers) {
  if (!(pop.params.eta.imag() > 0.0)) throw std::invalid_argument("population_step_a: Im(eta) must be positive");
  const cplx eta = pop.params.eta;
  const double r = std::norm(pop.params.z);
  return sweep(pop, seed, workers, [eta, r](cplx s1, cplx s2) {
    const cplx lead = eta + s1;
    return lead / (r - lead * (eta + s2));
  });
}

PopulationReport run_h_population(HPopulation pop, const PopulationRunOptions& options) {
  if (options.burn_in < 0 || options.measure < 1) throw std::invalid_argument("run_h_population: bad sweep counts");
  PopulationReport rep;
  for (int i = 0; i < options.burn_in; ++i) pop = population_step_h(pop, options.seed, options.workers);
  for (int i = 0; i < options.measure; ++i) {
    pop = population_step_h(pop, options.seed, options.workers);
    rep.moment_trace.push_back(pop.beta_moment());
    rep.mean_trace.push_back(pop.mean());
  }
  const double m = static_cast<double>(options.measure);
  rep.beta_moment = pairwise_sum(rep.moment_trace) / m;
  rep.mean = pairwise_sum(rep.mean_trace) / m;
  rep.y_estimate = rep.beta_moment > 0.0 ? std::pow(rep.beta_moment, 2.0 / pop.params.alpha) : 0.0;
  const auto [lo, hi] = std::minmax_element(rep.moment_trace.begin(), rep.moment_trace.end());
  rep.cauchy_gap = rep.beta_moment > 0.0 ? (*hi - *lo) / rep.beta_moment : 0.0;
  rep.final_state = std::move(pop);
  return rep;
}

PopulationReport run_h_population(const PopulationParams& params, const PopulationRunOptions& options) {
  check_params(params);
  if (options.size < kMinPopulation) throw std::invalid_argument("run_h_population: at least 1000 members required");
  const double r = std::norm(params.z);
  const double start = options.initial_value >= 0.0 ? options.initial_value : 1.0 / (r + params.t * params.t + 1.0);
  HPopulation pop{params, std::vector<double>(options.size, start), 0};
  if (params.t == 0.0 && options.initial_value < 0.0) {
    // Warm start on the t = 0.01 law; the all-zero law is also a fixed point at t = 0.
    pop.params.t = 0.01;
    for (int i = 0; i < options.burn_in; ++i) pop = population_step_h(pop, substream_seed(options.seed, 1u << 20), options.workers);
    pop.params.t = 0.0;
    pop.iteration = 0;
  }
  return run_h_population(std::move(pop), options);
}

std::vector<HistogramBin> population_histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty() || bins < 1) throw std::invalid_argument("population_histogram: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) out[i].value = lo + (static_cast<double>(i) + 0.5) * width;
  for (double v : values) {
    const auto i = std::min(bins - 1, static_cast<std::size_t>((v - lo) / width));
    ++out[i].count;
  }
  return out;
}

void write_population_histogram_csv(std::span<const HistogramBin> bins, const std::filesystem::path& path) {
  CsvWriter csv(path, {"value", "count"});
  for (const auto& b : bins) csv.row(std::vector<std::string>{format_real(b.value), std::to_string(b.count)});
}

}  // namespace ht
