#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ht {

using cplx = std::complex<double>;

// Fixed-order pairwise sum, so reductions do not depend on the worker count.
double pairwise_sum(std::span<const double> v);
cplx pairwise_sum(std::span<const cplx> v);

struct PopulationParams {
  double alpha = 1.5;
  cplx z{};
  double t = 1.0;              // h-population
  cplx eta{0.0, 1.0};          // a-population
  std::size_t truncation = 200;  // Poisson points kept per weight set
  // Replace the dropped weights by their conditional mean times the population mean.
  bool tail_compensation = true;
};

// Particle approximation of the law of h(z, t) on the tree.
struct HPopulation {
  PopulationParams params;
  std::vector<double> values;
  int iteration = 0;

  double beta_moment() const;  // E[h^{alpha/2}]
  double mean() const;
};

// Complex counterpart for a(z, eta).
struct APopulation {
  PopulationParams params;
  std::vector<cplx> values;
  int iteration = 0;

  cplx mean() const;
  double imag_beta_moment() const;  // E[(Im a)^{alpha/2}]
};

inline constexpr std::size_t kMinPopulation = 1000;

// One resampling sweep. Members are split into fixed blocks, each drawing from
// substream_seed(substream_seed(seed, iteration), block).
HPopulation population_step_h(const HPopulation& pop, std::uint64_t seed, unsigned workers = 1);
APopulation population_step_a(const APopulation& pop, std::uint64_t seed, unsigned workers = 1);

struct PopulationRunOptions {
  std::size_t size = 100000;
  int burn_in = 50;
  int measure = 50;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double initial_value = -1.0;  // < 0: start from 1/(|z|^2 + t^2 + 1), or from the t = 0.01 law when t = 0
};

struct PopulationReport {
  double beta_moment = 0.0;  // averaged over the measurement sweeps
  double y_estimate = 0.0;   // beta_moment^{1/beta}
  double mean = 0.0;         // E[h], averaged the same way
  double cauchy_gap = 0.0;   // max relative spread of the per-sweep beta moment during measurement
  std::vector<double> moment_trace;
  std::vector<double> mean_trace;
  HPopulation final_state;
};

PopulationReport run_h_population(const PopulationParams& params, const PopulationRunOptions& options);
// Same, starting from a given population (its iteration counter is kept).
PopulationReport run_h_population(HPopulation start, const PopulationRunOptions& options);

struct HistogramBin {
  double value = 0.0;  // bin centre
  std::size_t count = 0;
};

std::vector<HistogramBin> population_histogram(std::span<const double> values, std::size_t bins);
void write_population_histogram_csv(std::span<const HistogramBin> bins, const std::filesystem::path& path);

}  // namespace ht
