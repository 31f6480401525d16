#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heavytail/heavy_matrix.hpp"

namespace ht {

using cplx = std::complex<double>;

// Uniform probability measure on a list of atoms.
struct EmpiricalMeasure {
  std::vector<cplx> atoms;
  double weight() const { return atoms.empty() ? 0.0 : 1.0 / static_cast<double>(atoms.size()); }
};

// Relative bound on |A - Z T Z^*|_F / |A|_F accepted from the Schur decomposition.
inline constexpr double kSchurResidualTol = 1e-8;

// Eigenvalues sorted by decreasing modulus, ties by increasing argument.
// Throws NonConvergence if the QR iteration fails or the Schur residual is too large.
std::vector<cplx> eigenvalues(const Eigen::MatrixXcd& a);
// Same, with the sample seed attached to any failure message.
std::vector<cplx> eigenvalues(const MatrixSample& m);

enum class SvPath { svd, bipartization };

// Singular values of A - zI, decreasing.
std::vector<double> singular_values(const Eigen::MatrixXcd& a, cplx z = {}, SvPath path = SvPath::svd);

// Mean of ln s_k(A - z); -infinity when A - z is numerically singular.
double log_potential(const Eigen::MatrixXcd& a, cplx z);

// dist(R_i, span of the other rows) for each row i of m.
std::vector<double> row_distances(const Eigen::MatrixXcd& m);

enum class CheckStatus { pass, fail, skipped };

struct IdentityCheck {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double worst = 0.0;  // largest violation or relative error seen
  std::string detail;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  int passed() const;
  int failed() const;
  bool ok() const { return failed() == 0; }
};

// Weyl products, Weyl power sums, row-deletion interlacing, negative second
// moment, row-distance bounds on s_n and the Schatten row bound, for A - zI.
IdentityReport identity_suite(const Eigen::MatrixXcd& a, cplx z = {});

struct ConcentrationRow {
  std::size_t n = 0;
  double mean = 0.0;
  double std_dev = 0.0;
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> rows;
  bool monotone_decrease = false;
  double slope = 0.0;  // least squares of log std against log n
};

// Spread of (1/n) sum_k f(s_k(A_n)) across independent samples for each n.
ConcentrationReport concentration_probe(const HeavyTailLaw& law, const std::function<double(double)>& f,
                                        std::span<const std::size_t> n_list, std::size_t samples,
                                        std::uint64_t seed, unsigned workers = 1);

struct RadialHistogram {
  std::vector<double> edges;  // increasing radii, edges.front() >= 0
  std::vector<double> mass;   // fraction of atoms per annulus
  std::vector<double> density() const;
};

RadialHistogram radial_histogram(const EmpiricalMeasure& mu, std::vector<double> edges);

void write_measure_csv(const EmpiricalMeasure& mu, const std::filesystem::path& path);
void write_radial_histogram_csv(const RadialHistogram& h, const std::filesystem::path& path);

}  // namespace ht
