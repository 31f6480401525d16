#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heavytail/config.hpp"
#include "heavytail/population.hpp"
#include "heavytail/rde.hpp"
#include "heavytail/spectra.hpp"
#include "heavytail/statistics.hpp"

namespace ht {

// Radii splitting the disc of radius r_max into `bins` annuli of equal area.
std::vector<double> equal_area_edges(double r_max, std::size_t bins);

// Mass of the limiting eigenvalue law in each annulus, by Gauss-Legendre in |z|
// on every bin. Mass beyond the last edge is not included.
RadialHistogram theory_histogram(const GEvaluator& ev, const std::vector<double>& edges, unsigned workers = 1);

struct EsdDeviation {
  double sup_abs = 0.0;       // max over bins of |density difference|
  double peak = 0.0;          // max theory bin density
  double sup_relative = 0.0;  // sup_abs / peak
  double l1 = 0.0;            // sum over bins of |mass difference|
  std::size_t sectors = 0;
  ChiSquareResult angular;    // argument uniformity of the empirical atoms
};

// Compares bin densities of two histograms on the same edges, and tests the
// arguments of `atoms` for uniformity over `sectors` equal sectors.
EsdDeviation compare_esd(const RadialHistogram& empirical, const RadialHistogram& theory,
                         std::span<const cplx> atoms = {}, std::size_t sectors = 16);

struct NormalizationReport {
  double cutoff = 0.0;
  double core = 0.0;  // 2 pi int_0^cutoff u rho(u^2) du
  double tail = 0.0;  // completion beyond the cutoff
  double total = 0.0;
};

// Tail completion fits C u^{2(alpha-1)} exp(-u^alpha) at the cutoff.
NormalizationReport radial_normalization(const GEvaluator& ev, double cutoff, int panels = 12,
                                         unsigned workers = 1);

struct PwitProbeOptions {
  int depth = 6;
  std::size_t branching = 50;
  std::size_t trees = 200;
  double tolerance = 0.3;       // influence threshold of the adaptive expansion
  std::size_t checked_trees = 5;  // trees cross-checked against the direct solve
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct PwitProbe {
  Estimate closed;  // E[Im a(z, it)] with the closure
  Estimate raw;     // same trees, discarded parts set to zero
  double mean_vertices = 0.0;
  double max_solve_gap = 0.0;
  std::size_t capped = 0;
};

// Root resolvents of independent truncated trees at U(z, it), closed with the
// given h-law statistics.
PwitProbe pwit_probe(double alpha, cplx z, double t, double y_scale, double h_mean, const PwitProbeOptions& options);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

// Exact cross-checks for A - zI: log potential against mean log singular value
// and (1/n) ln|det|; bipartized spectrum against the signed singular values;
// the resolvent trace against the singular value Stieltjes transform.
std::vector<CheckResult> exact_oracle_checks(const Eigen::MatrixXcd& a, cplx z);

struct RunOverrides {
  unsigned workers = 0;          // 0: config value, then default_workers()
  std::uint64_t seed_offset = 0;
  std::filesystem::path output;  // empty: config value
};

struct RunResult {
  ExperimentConfig config;       // effective config after overrides
  std::vector<CheckResult> checks;
  std::vector<std::filesystem::path> files;
  std::string summary;
  double seconds = 0.0;
  int exit_status() const;
};

// Runs one experiment, writes its CSV files and manifest.json into the output
// directory, and returns the checks it declared.
RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides = {});

struct SuiteResult {
  std::vector<CheckResult> checks;
  int exit_status() const;
};

// "exact": identities with no sampling error. "mc": fast Monte Carlo calibrations.
SuiteResult verify_suite(const std::string& suite, unsigned workers = 1);

}  // namespace ht
