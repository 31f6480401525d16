#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "heavytail/bipartize.hpp"
#include "heavytail/stable_law.hpp"

namespace ht {

struct PwitVertex {
  std::int64_t parent = -1;
  int depth = 0;
  double mark = 0.0;        // y_v: arrival of the rate-2 modulus process at the parent
  bool toward_parent = false;  // epsilon_v = 1: the edge points from v to its parent
  std::size_t first_child = 0;
  std::size_t child_count = 0;
  double last_child_mark = 0.0;  // largest kept child mark; 0 when not expanded
  bool frontier = true;           // children not generated
  double lepage[2] = {0.0, 0.0};  // stable draws used by the frontier closure
  std::uint64_t key = 0;          // random stream of this vertex, a function of its path only

  double weight(double alpha) const { return std::pow(mark, -1.0 / alpha); }
};

struct PwitOptions {
  int depth = 6;
  std::size_t branching = 50;
  std::size_t max_vertices = 400000;
};

// Depth-truncated PWIT(2 l_theta). Each expanded vertex carries its first K
// marks, sorted; orientation marks are fair coins per edge. The marks below a
// vertex depend only on the seed and the path to it, so a partially expanded
// tree is a subtree of the full one.
class TruncatedPwit {
 public:
  // Root alone, not yet expanded.
  TruncatedPwit(double alpha, PwitOptions options, std::uint64_t seed);

  double alpha() const noexcept { return alpha_; }
  const PwitOptions& options() const noexcept { return options_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<PwitVertex>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  std::size_t frontier_count() const;

  // Generates the K children of frontier vertex v. Returns false at the depth
  // limit or when the vertex cap would be exceeded.
  bool expand(std::size_t v);

  // <delta_parent, A delta_v> and <delta_v, A delta_parent>.
  double weight_down(std::size_t v) const;
  double weight_up(std::size_t v) const;

  // Finite operator on the kept vertices (breadth-first order, root first).
  Eigen::SparseMatrix<double> operator_matrix() const;

 private:
  double alpha_;
  PwitOptions options_;
  std::uint64_t seed_;
  StableLaw stable_;
  std::vector<PwitVertex> vertices_;
};

// Expands breadth-first until the depth limit or the vertex cap.
TruncatedPwit build_truncated_pwit(double alpha, int depth, std::size_t branching, std::uint64_t seed,
                                   std::size_t max_vertices = PwitOptions{}.max_vertices);

// Stand-in for the discarded part of the tree. The subtree sums missing below a
// frontier vertex are replaced by frontier_entry * S for independent beta-stable S,
// and the weights past the K-th child of an expanded vertex contribute
// tail_entry times their conditional mean.
struct PwitClosure {
  cplx frontier_entry{};
  cplx tail_entry{};
};

// Closure for eta = it from E[h^beta]^{1/beta} and E[h] of the h-law.
PwitClosure closure_from_h_law(double y_scale, double h_mean);

inline constexpr double kTreeAgreementTol = 1e-9;
inline constexpr std::size_t kDenseTreeLimit = 512;

struct RootResolvent {
  ResolventBlock block;     // from the leaf-to-root recursion
  double solve_gap = 0.0;   // max entry gap against the direct solve
  bool sparse_solve = false;
};

// R(U)_oo by the tree Schur recursion and by a direct solve of the bipartized
// operator (dense up to kDenseTreeLimit vertices, sparse LU above). Throws
// StructuralError when the two disagree.
RootResolvent root_resolvent(const TruncatedPwit& tree, const QuaternionPoint& u, const PwitClosure* closure = nullptr);

// Schur recursion alone.
ResolventBlock root_resolvent_schur(const TruncatedPwit& tree, const QuaternionPoint& u,
                                    const PwitClosure* closure = nullptr);

struct RefineReport {
  int passes = 0;
  std::size_t expanded = 0;
  bool capped = false;  // stopped by the vertex cap with candidates left
};

// Repeatedly expands every frontier vertex whose first-order influence on R_oo,
// |dR_oo/dR_v| * |R_v|, exceeds `tolerance`. Influence is propagated as
// |R_parent|^2 |w|^2 per edge and evaluated with every frontier draw set to 1,
// so which vertices get expanded is a function of the marks only.
RefineReport refine_truncated_pwit(TruncatedPwit& tree, const QuaternionPoint& u, const PwitClosure* closure,
                                   double tolerance);
TruncatedPwit adaptive_truncated_pwit(double alpha, PwitOptions options, std::uint64_t seed, const QuaternionPoint& u,
                                      const PwitClosure* closure, double tolerance, RefineReport* report = nullptr);

}  // namespace ht
