#include "heavytail/bipartize.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "heavytail/errors.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/random.hpp"

namespace ht {

QuaternionPoint::QuaternionPoint(cplx z, cplx eta) : z_(z), eta_(eta) {
  if (!(eta.imag() > 0.0)) throw std::invalid_argument("QuaternionPoint: eta must lie in the upper half-plane");
}

Eigen::MatrixXcd bipartized_matrix(const Eigen::MatrixXcd& a, cplx z) {
  if (a.rows() != a.cols()) throw std::invalid_argument("bipartized_matrix: square matrix required");
  if (!a.allFinite()) throw std::invalid_argument("bipartized_matrix: non-finite entry");
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const cplx shift = (i == j) ? z : cplx{};
      b(2 * i, 2 * j + 1) = a(i, j) - shift;
      b(2 * i + 1, 2 * j) = std::conj(a(j, i) - shift);
    }
  }
  return b;
}

Eigen::MatrixXcd offdiagonal_bipartization(const Eigen::MatrixXcd& a, cplx z) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd shifted = a - z * Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  b.topRightCorner(n, n) = shifted;
  b.bottomLeftCorner(n, n) = shifted.adjoint();
  return b;
}

Eigen::MatrixXcd site_major_to_offdiagonal(const Eigen::MatrixXcd& b) {
  const Eigen::Index n = b.rows() / 2;
  Eigen::VectorXi perm(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    perm(2 * i) = static_cast<int>(i);
    perm(2 * i + 1) = static_cast<int>(n + i);
  }
  Eigen::PermutationMatrix<Eigen::Dynamic> p(perm);
  return p * b * p.transpose();
}

std::vector<ResolventBlock> resolvent_blocks(const Eigen::MatrixXcd& a, const QuaternionPoint& u) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd m = bipartized_matrix(a, u.z());
  m.diagonal().array() -= u.eta();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const Eigen::MatrixXcd x = lu.solve(Eigen::MatrixXcd::Identity(2 * n, 2 * n));

  // Residual |M X v - v| of the computed inverse on fixed sign probes.
  RandomStream probe_rng(0x5eed);
  double residual = 0.0;
  for (int p = 0; p < 3; ++p) {
    Eigen::VectorXcd v(2 * n);
    for (auto& e : v) e = probe_rng.bernoulli_half() ? 1.0 : -1.0;
    const Eigen::VectorXcd r = m * (x * v) - v;
    residual = std::max(residual, r.cwiseAbs().maxCoeff());
  }
  if (!std::isfinite(residual) || residual > kResolventResidualTol) {
    throw NumericalSingularity("resolvent_blocks: solve residual " + std::to_string(residual) + " exceeds tolerance");
  }

  std::vector<ResolventBlock> out(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = {x(2 * k, 2 * k), x(2 * k, 2 * k + 1), x(2 * k + 1, 2 * k),
                                        x(2 * k + 1, 2 * k + 1)};
  }
  return out;
}

cplx stieltjes_sv(const Eigen::MatrixXcd& a, cplx z, cplx eta) {
  const auto blocks = resolvent_blocks(a, QuaternionPoint(z, eta));
  cplx sum{};
  for (const auto& blk : blocks) sum += blk.a + blk.c;
  return sum / (2.0 * static_cast<double>(blocks.size()));
}

namespace {

cplx sum_b(const Eigen::MatrixXcd& a, cplx z, double t) {
  cplx s{};
  for (const auto& blk : resolvent_blocks(a, QuaternionPoint(z, cplx(0.0, t)))) s += blk.b;
  return s;
}

}  // namespace

std::vector<DensityCell> mu_from_b(const Eigen::MatrixXcd& a, double t, const ZGrid& grid, double h,
                                   unsigned workers) {
  if (!(h > 0.0)) throw std::invalid_argument("mu_from_b: grid spacing h must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("mu_from_b: t must be positive");
  if (grid.nx < 1 || grid.ny < 1) throw std::invalid_argument("mu_from_b: empty grid");
  const double n = static_cast<double>(a.rows());
  const std::size_t cells = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
  std::vector<DensityCell> out(cells);
  parallel_for(cells, workers, [&](std::size_t idx) {
    const int i = static_cast<int>(idx % static_cast<std::size_t>(grid.nx));
    const int j = static_cast<int>(idx / static_cast<std::size_t>(grid.nx));
    const cplx z(grid.x(i), grid.y(j));
    const cplx dx = (sum_b(a, z + h, t) - sum_b(a, z - h, t)) / (2.0 * h);
    const cplx dy = (sum_b(a, z + cplx(0.0, h), t) - sum_b(a, z - cplx(0.0, h), t)) / (2.0 * h);
    const cplx mu = -(0.5 * (dx - cplx(0.0, 1.0) * dy)) / (std::numbers::pi * n);
    out[idx] = {z.real(), z.imag(), mu.real(), mu.imag(), std::abs(mu.imag()) > 1e-3};
  });
  return out;
}

}  // namespace ht
