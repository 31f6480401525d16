#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ht {

using cplx = std::complex<double>;

// U(z, eta) = [[eta, z], [conj(z), eta]] with Im(eta) > 0.
class QuaternionPoint {
 public:
  QuaternionPoint(cplx z, cplx eta);
  cplx z() const noexcept { return z_; }
  cplx eta() const noexcept { return eta_; }

 private:
  cplx z_;
  cplx eta_;
};

// Diagonal 2x2 block [[a, b], [b_prime, c]] of a resolvent.
struct ResolventBlock {
  cplx a;
  cplx b;
  cplx b_prime;
  cplx c;
};

// 2n x 2n Hermitian matrix, site-major: rows 2i, 2i+1 belong to site i and
// block (i, j) is [[0, A_ij - z d_ij], [conj(A_ji - z d_ij), 0]].
Eigen::MatrixXcd bipartized_matrix(const Eigen::MatrixXcd& a, cplx z);
// The same operator in [[0, A - z], [(A - z)^*, 0]] layout.
Eigen::MatrixXcd offdiagonal_bipartization(const Eigen::MatrixXcd& a, cplx z);
// Permutes a site-major 2n x 2n matrix into the off-diagonal layout.
Eigen::MatrixXcd site_major_to_offdiagonal(const Eigen::MatrixXcd& b);

inline constexpr double kResolventResidualTol = 1e-8;

// Diagonal blocks of (B(z) - eta I)^{-1}; throws NumericalSingularity when the
// solve residual exceeds kResolventResidualTol.
std::vector<ResolventBlock> resolvent_blocks(const Eigen::MatrixXcd& a, const QuaternionPoint& u);

// (1/2n) sum_k (a_k + c_k): Stieltjes transform of the symmetrized singular value law of A - z.
cplx stieltjes_sv(const Eigen::MatrixXcd& a, cplx z, cplx eta);

struct ZGrid {
  double x_min, x_max;
  int nx;
  double y_min, y_max;
  int ny;
  double x(int i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1); }
  double y(int j) const { return ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1); }
};

struct DensityCell {
  double x, y;
  double density;
  double imag_residue;
  bool flagged;  // |imag_residue| > 1e-3
};

// -(1/(pi n)) sum_k d b_k(z, it), d = (d_x - i d_y)/2 by central differences at spacing h.
std::vector<DensityCell> mu_from_b(const Eigen::MatrixXcd& a, double t, const ZGrid& grid, double h,
                                   unsigned workers = 1);

}  // namespace ht
