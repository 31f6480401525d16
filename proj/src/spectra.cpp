#include "heavytail/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <lapacke.h>

#include "heavytail/bipartize.hpp"
#include "heavytail/csv.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/statistics.hpp"

namespace ht {

namespace {

bool by_modulus_then_angle(const cplx& x, const cplx& y) {
  const double ax = std::abs(x), ay = std::abs(y);
  if (ax != ay) return ax > ay;
  return std::arg(x) < std::arg(y);
}

Eigen::MatrixXcd shifted(const Eigen::MatrixXcd& a, cplx z) {
  Eigen::MatrixXcd m = a;
  m.diagonal().array() -= z;
  return m;
}

}  // namespace

std::vector<cplx> eigenvalues(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigenvalues: square matrix required");
  if (!a.allFinite()) throw std::invalid_argument("eigenvalues: non-finite entry");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (n == 0) return {};
  Eigen::MatrixXcd t = a;
  Eigen::MatrixXcd z(n, n);
  std::vector<cplx> w(static_cast<std::size_t>(n));
  lapack_int sdim = 0;
  const lapack_int info =
      LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, reinterpret_cast<lapack_complex_double*>(t.data()), n,
                    &sdim, reinterpret_cast<lapack_complex_double*>(w.data()),
                    reinterpret_cast<lapack_complex_double*>(z.data()), n);
  if (info != 0) {
    throw NonConvergence("eigenvalues: Schur iteration failed (info=" + std::to_string(info) + ")",
                         std::numeric_limits<double>::quiet_NaN());
  }
  const double norm = a.norm();
  const double residual = (a - z * t.triangularView<Eigen::Upper>() * z.adjoint()).norm();
  if (norm > 0.0 && residual > kSchurResidualTol * norm) {
    throw NonConvergence("eigenvalues: Schur residual " + std::to_string(residual / norm) + " too large",
                         residual / norm);
  }
  std::sort(w.begin(), w.end(), by_modulus_then_angle);
  return w;
}

std::vector<cplx> eigenvalues(const MatrixSample& m) {
  try {
    return eigenvalues(m.entries);
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string(e.what()) + " [seed " + std::to_string(m.seed) + "]", e.partial_value());
  }
}

std::vector<double> singular_values(const Eigen::MatrixXcd& a, cplx z, SvPath path) {
  const Eigen::Index n = a.rows();
  std::vector<double> s(static_cast<std::size_t>(n));
  if (path == SvPath::svd) {
    const Eigen::BDCSVD<Eigen::MatrixXcd> svd(shifted(a, z));
    const Eigen::VectorXd& v = svd.singularValues();
    for (Eigen::Index k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = v(k);
  } else {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bipartized_matrix(a, z), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw NonConvergence("singular_values: Hermitian eigensolver failed", std::numeric_limits<double>::quiet_NaN());
    }
    // Eigenvalues come in +-s pairs, ascending; the top half are the singular values.
    const Eigen::VectorXd& ev = es.eigenvalues();
    for (Eigen::Index k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = std::max(0.0, ev(2 * n - 1 - k));
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

double log_potential(const Eigen::MatrixXcd& a, cplx z) {
  const auto s = singular_values(a, z);
  if (s.empty()) return 0.0;
  const double floor = static_cast<double>(s.size()) * std::numeric_limits<double>::epsilon() * s.front();
  if (s.back() <= floor) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double v : s) acc += std::log(v);
  return acc / static_cast<double>(s.size());
}

std::vector<double> row_distances(const Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  std::vector<double> d(static_cast<std::size_t>(n));
  if (n == 1) {
    d[0] = m.row(0).norm();
    return d;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXcd others(m.cols(), n - 1);
    for (Eigen::Index j = 0, c = 0; j < n; ++j) {
      if (j != i) others.col(c++) = m.row(j).transpose();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(others);
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.cols(), n - 1);
    const Eigen::VectorXcd r = m.row(i).transpose();
    d[static_cast<std::size_t>(i)] = (r - q * (q.adjoint() * r)).norm();
  }
  return d;
}

int IdentityReport::passed() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::pass; }));
}

int IdentityReport::failed() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::fail; }));
}

namespace {

constexpr double kSlack = 1e-10;

// Records the worst relative violation of lhs <= rhs.
void inequality(IdentityCheck& c, double lhs, double rhs, double scale) {
  const double excess = (lhs - rhs) / std::max(scale, std::numeric_limits<double>::min());
  c.worst = std::max(c.worst, excess);
  if (excess > kSlack) c.status = CheckStatus::fail;
}

double power_sum(const std::vector<double>& xs, double r) {
  double acc = 0.0;
  for (double x : xs) acc += std::pow(x, r);
  return acc;
}

}  // namespace

IdentityReport identity_suite(const Eigen::MatrixXcd& a, cplx z) {
  const Eigen::MatrixXcd m = shifted(a, z);
  const std::size_t n = static_cast<std::size_t>(m.rows());
  const auto lambda = eigenvalues(m);
  const auto s = singular_values(m);
  constexpr double kPowers[] = {0.5, 1.0, 2.0};

  IdentityReport rep;
  {
    IdentityCheck c;
    c.name = "weyl_products";
    double log_l = 0.0, log_s = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      log_l += std::log(std::abs(lambda[k]));
      log_s += std::log(s[k]);
      scale += std::abs(std::log(s[k])) + 1.0;
      if (std::isfinite(log_s)) inequality(c, log_l, log_s, scale);
    }
    rep.checks.push_back(c);
  }
  {
    IdentityCheck c;
    c.name = "weyl_power_sums";
    std::vector<double> mod(n);
    for (std::size_t k = 0; k < n; ++k) mod[k] = std::abs(lambda[k]);
    for (double r : kPowers) {
      const double rhs = power_sum(s, r);
      inequality(c, power_sum(mod, r), rhs, rhs);
    }
    rep.checks.push_back(c);
  }
  {
    IdentityCheck c;
    c.name = "row_deletion_interlacing";
    const std::size_t deletions[] = {1, n / 2};
    for (std::size_t del : deletions) {
      if (del == 0 || del >= n) continue;
      const std::size_t kept = n - del;
      // Drop the last row once, then the first half of the rows.
      const Eigen::MatrixXcd b = del == 1 ? Eigen::MatrixXcd(m.topRows(static_cast<Eigen::Index>(kept)))
                                          : Eigen::MatrixXcd(m.bottomRows(static_cast<Eigen::Index>(kept)));
      const Eigen::BDCSVD<Eigen::MatrixXcd> svd(b);
      const Eigen::VectorXd& sb = svd.singularValues();
      for (std::size_t i = 0; i < kept; ++i) {
        inequality(c, sb(static_cast<Eigen::Index>(i)), s[i], s.front());
        inequality(c, s[i + del], sb(static_cast<Eigen::Index>(i)), s.front());
      }
    }
    rep.checks.push_back(c);
  }
  const bool full_rank = s.back() > 1e-10 * s.front();
  const std::vector<double> dist = full_rank ? row_distances(m) : std::vector<double>{};
  {
    IdentityCheck c;
    c.name = "negative_second_moment";
    if (!full_rank) {
      c.status = CheckStatus::skipped;
      c.detail = "rank deficient: s_min <= 1e-10 s_max";
    } else {
      double lhs = 0.0, rhs = 0.0;
      for (double v : s) lhs += 1.0 / (v * v);
      for (double d : dist) rhs += 1.0 / (d * d);
      c.worst = std::abs(lhs - rhs) / rhs;
      if (c.worst > 1e-8) c.status = CheckStatus::fail;
    }
    rep.checks.push_back(c);
  }
  {
    IdentityCheck c;
    c.name = "row_distance_bounds";
    if (!full_rank) {
      c.status = CheckStatus::skipped;
      c.detail = "rank deficient: s_min <= 1e-10 s_max";
    } else {
      const double dmin = *std::min_element(dist.begin(), dist.end());
      inequality(c, dmin / std::sqrt(static_cast<double>(n)), s.back(), dmin);
      inequality(c, s.back(), dmin, dmin);
    }
    rep.checks.push_back(c);
  }
  {
    IdentityCheck c;
    c.name = "schatten_row_bound";
    std::vector<double> row_norms(n);
    for (std::size_t k = 0; k < n; ++k) row_norms[k] = m.row(static_cast<Eigen::Index>(k)).norm();
    for (double r : kPowers) {
      const double rhs = power_sum(row_norms, r);
      inequality(c, power_sum(s, r), rhs, rhs);
    }
    rep.checks.push_back(c);
  }
  return rep;
}

ConcentrationReport concentration_probe(const HeavyTailLaw& law, const std::function<double(double)>& f,
                                        std::span<const std::size_t> n_list, std::size_t samples,
                                        std::uint64_t seed, unsigned workers) {
  if (samples < 2) throw std::invalid_argument("concentration_probe: need at least two samples per n");
  ConcentrationReport rep;
  std::vector<double> log_n, log_sd;
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    const std::size_t n = n_list[idx];
    std::vector<double> stat(samples);
    const std::uint64_t n_seed = substream_seed(seed, n);
    parallel_for(samples, workers, [&](std::size_t k) {
      const MatrixSample m = build_matrix(law, n, substream_seed(n_seed, k));
      double acc = 0.0;
      for (double v : singular_values(m.entries)) acc += f(v);
      stat[k] = acc / static_cast<double>(n);
    });
    const Estimate e = mean_estimate(stat);
    rep.rows.push_back({n, e.value, sample_std(stat)});
    log_n.push_back(std::log(static_cast<double>(n)));
    log_sd.push_back(std::log(rep.rows.back().std_dev));
  }
  rep.monotone_decrease = rep.rows.size() >= 2;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (!(rep.rows[i].std_dev < rep.rows[i - 1].std_dev)) rep.monotone_decrease = false;
  }
  const bool finite = std::all_of(log_sd.begin(), log_sd.end(), [](double v) { return std::isfinite(v); });
  rep.slope = (rep.rows.size() >= 2 && finite) ? ols_slope(log_n, log_sd) : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

std::vector<double> RadialHistogram::density() const {
  std::vector<double> out(mass.size());
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const double area = std::numbers::pi * (edges[i + 1] * edges[i + 1] - edges[i] * edges[i]);
    out[i] = mass[i] / area;
  }
  return out;
}

RadialHistogram radial_histogram(const EmpiricalMeasure& mu, std::vector<double> edges) {
  if (edges.size() < 2 || edges.front() < 0.0 || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("radial_histogram: edges must be nonnegative and strictly increasing");
  }
  RadialHistogram h;
  h.edges = std::move(edges);
  h.mass.assign(h.edges.size() - 1, 0.0);
  const double w = mu.weight();
  for (const cplx& z : mu.atoms) {
    const double r = std::abs(z);
    const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), r);
    if (it == h.edges.begin() || it == h.edges.end()) continue;
    h.mass[static_cast<std::size_t>(it - h.edges.begin() - 1)] += w;
  }
  return h;
}

void write_measure_csv(const EmpiricalMeasure& mu, const std::filesystem::path& path) {
  CsvWriter out(path, {"re", "im", "weight"});
  for (const cplx& z : mu.atoms) out.row({z.real(), z.imag(), mu.weight()});
}

void write_radial_histogram_csv(const RadialHistogram& h, const std::filesystem::path& path) {
  CsvWriter out(path, {"r_lo", "r_hi", "mass", "density"});
  const auto dens = h.density();
  for (std::size_t i = 0; i < h.mass.size(); ++i) out.row({h.edges[i], h.edges[i + 1], h.mass[i], dens[i]});
}

}  // namespace ht
