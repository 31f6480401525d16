#include "heavytail/pwit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SparseLU>

#include "heavytail/errors.hpp"
#include "heavytail/random.hpp"
#include "heavytail/stable_law.hpp"

namespace ht {

double TruncatedPwit::weight_down(std::size_t v) const {
  const auto& x = vertices_.at(v);
  return (x.parent >= 0 && x.toward_parent) ? x.weight(alpha_) : 0.0;
}

double TruncatedPwit::weight_up(std::size_t v) const {
  const auto& x = vertices_.at(v);
  return (x.parent >= 0 && !x.toward_parent) ? x.weight(alpha_) : 0.0;
}

Eigen::SparseMatrix<double> TruncatedPwit::operator_matrix() const {
  const auto n = static_cast<Eigen::Index>(vertices_.size());
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t v = 1; v < vertices_.size(); ++v) {
    const auto p = static_cast<Eigen::Index>(vertices_[v].parent);
    const auto c = static_cast<Eigen::Index>(v);
    if (vertices_[v].toward_parent) {
      entries.emplace_back(p, c, weight_down(v));
    } else {
      entries.emplace_back(c, p, weight_up(v));
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

std::size_t TruncatedPwit::frontier_count() const {
  return static_cast<std::size_t>(
      std::count_if(vertices_.begin(), vertices_.end(), [](const PwitVertex& v) { return v.frontier; }));
}

bool TruncatedPwit::expand(std::size_t v) {
  PwitVertex& cur = vertices_.at(v);
  if (!cur.frontier || cur.depth >= options_.depth) return false;
  if (vertices_.size() + options_.branching > options_.max_vertices) return false;
  const std::uint64_t key = cur.key;
  const int depth = cur.depth;
  cur.frontier = false;
  cur.first_child = vertices_.size();
  cur.child_count = options_.branching;
  RandomStream rng(substream_seed(key, 0));
  double mark = 0.0;
  for (std::size_t k = 0; k < options_.branching; ++k) {
    mark += 0.5 * rng.exponential();
    PwitVertex child;
    child.parent = static_cast<std::int64_t>(v);
    child.depth = depth + 1;
    child.mark = mark;
    child.toward_parent = rng.bernoulli_half();
    child.key = substream_seed(key, k + 1);
    RandomStream closure_rng(substream_seed(child.key, ~0ULL));
    child.lepage[0] = stable_.sample(closure_rng);
    child.lepage[1] = stable_.sample(closure_rng);
    vertices_.push_back(child);
  }
  vertices_[v].last_child_mark = mark;
  return true;
}

TruncatedPwit::TruncatedPwit(double alpha, PwitOptions options, std::uint64_t seed)
    : alpha_(alpha), options_(options), seed_(seed), stable_(alpha / 2.0) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("TruncatedPwit: alpha must lie in (0, 2)");
  if (options.depth < 0) throw std::invalid_argument("TruncatedPwit: depth must be nonnegative");
  if (options.branching < 1) throw std::invalid_argument("TruncatedPwit: branching must be at least 1");
  PwitVertex root;
  root.key = seed;
  RandomStream closure_rng(substream_seed(seed, ~0ULL));
  root.lepage[0] = stable_.sample(closure_rng);
  root.lepage[1] = stable_.sample(closure_rng);
  vertices_.push_back(root);
}

TruncatedPwit build_truncated_pwit(double alpha, int depth, std::size_t branching, std::uint64_t seed,
                                   std::size_t max_vertices) {
  TruncatedPwit tree(alpha, PwitOptions{depth, branching, max_vertices}, seed);
  for (std::size_t v = 0; v < tree.size(); ++v) tree.expand(v);
  return tree;
}

PwitClosure closure_from_h_law(double y_scale, double h_mean) {
  return {cplx(0.0, y_scale), cplx(0.0, h_mean)};
}

namespace {

// Diagonal terms standing in for the part of the tree below v that was not kept.
// With `typical` set, the frontier draws are replaced by 1 so that the result
// depends on the marks alone.
Eigen::Vector2cd closure_terms(const TruncatedPwit& tree, std::size_t v, const PwitClosure* closure,
                               bool typical = false) {
  Eigen::Vector2cd d = Eigen::Vector2cd::Zero();
  if (!closure) return d;
  const auto& x = tree.vertices()[v];
  if (x.frontier) {
    d(0) = closure->frontier_entry * (typical ? 1.0 : x.lepage[0]);
    d(1) = closure->frontier_entry * (typical ? 1.0 : x.lepage[1]);
  } else {
    // Each orientation sees a unit-rate process beyond the last kept mark.
    const double p = 2.0 / tree.alpha();
    const double mass = std::pow(x.last_child_mark, 1.0 - p) / (p - 1.0);
    d.setConstant(closure->tail_entry * mass);
  }
  return d;
}

ResolventBlock to_block(const Eigen::Matrix2cd& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

ResolventBlock direct_root(const TruncatedPwit& tree, const QuaternionPoint& u, const PwitClosure* closure,
                           bool& sparse) {
  const std::size_t nv = tree.size();
  const auto dim = static_cast<Eigen::Index>(2 * nv);
  const cplx z = u.z(), eta = u.eta();
  std::vector<Eigen::Triplet<cplx>> entries;
  entries.reserve(6 * nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto i = static_cast<Eigen::Index>(2 * v);
    const Eigen::Vector2cd d = closure_terms(tree, v, closure);
    entries.emplace_back(i, i, -eta - d(0));
    entries.emplace_back(i + 1, i + 1, -eta - d(1));
    entries.emplace_back(i, i + 1, -z);
    entries.emplace_back(i + 1, i, -std::conj(z));
    if (v == 0) continue;
    const auto p = static_cast<Eigen::Index>(2 * tree.vertices()[v].parent);
    const double down = tree.weight_down(v), up = tree.weight_up(v);
    // Block (p, v) = [[0, A_pv], [A_vp, 0]] and its adjoint at (v, p).
    if (down != 0.0) {
      entries.emplace_back(p, i + 1, down);
      entries.emplace_back(i + 1, p, down);
    }
    if (up != 0.0) {
      entries.emplace_back(p + 1, i, up);
      entries.emplace_back(i, p + 1, up);
    }
  }
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(dim, 2);
  rhs(0, 0) = 1.0;
  rhs(1, 1) = 1.0;
  Eigen::Matrix2cd root;
  sparse = nv > kDenseTreeLimit;
  Eigen::SparseMatrix<cplx> m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  if (!sparse) {
    const Eigen::MatrixXcd dense(m);
    root = dense.partialPivLu().solve(rhs).topRows(2);
  } else {
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw NumericalSingularity("root_resolvent: sparse factorization failed");
    root = Eigen::MatrixXcd(lu.solve(rhs)).topRows(2);
  }
  return to_block(root);
}

// Resolvent blocks of every kept subtree, leaves first.
std::vector<Eigen::Matrix2cd> subtree_resolvents(const TruncatedPwit& tree, const QuaternionPoint& u,
                                                 const PwitClosure* closure, bool typical = false) {
  const auto& vs = tree.vertices();
  Eigen::Matrix2cd base;
  base << u.eta(), u.z(), std::conj(u.z()), u.eta();
  std::vector<Eigen::Matrix2cd> r(vs.size());
  // Children always follow their parent in storage order.
  for (std::size_t v = vs.size(); v-- > 0;) {
    Eigen::Matrix2cd acc = base;
    acc.diagonal() += closure_terms(tree, v, closure, typical);
    for (std::size_t k = vs[v].first_child; k < vs[v].first_child + vs[v].child_count; ++k) {
      Eigen::Matrix2cd edge;
      edge << 0.0, tree.weight_down(k), tree.weight_up(k), 0.0;
      acc += edge * r[k] * edge.adjoint();
    }
    r[v] = -acc.inverse();
  }
  return r;
}

}  // namespace

ResolventBlock root_resolvent_schur(const TruncatedPwit& tree, const QuaternionPoint& u, const PwitClosure* closure) {
  return to_block(subtree_resolvents(tree, u, closure)[0]);
}

RefineReport refine_truncated_pwit(TruncatedPwit& tree, const QuaternionPoint& u, const PwitClosure* closure,
                                   double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("refine_truncated_pwit: tolerance must be positive");
  RefineReport rep;
  for (;;) {
    // Deciding from the closure draws themselves would bias the kept frontier.
    const auto r = subtree_resolvents(tree, u, closure, true);
    const auto& vs = tree.vertices();
    std::vector<double> influence(vs.size(), 1.0);
    std::vector<std::size_t> todo;
    for (std::size_t v = 0; v < vs.size(); ++v) {
      if (v > 0) {
        const std::size_t p = static_cast<std::size_t>(vs[v].parent);
        const double w = vs[v].weight(tree.alpha());
        influence[v] = influence[p] * r[p].squaredNorm() * w * w;
      }
      if (vs[v].frontier && vs[v].depth < tree.options().depth && influence[v] * r[v].norm() > tolerance) {
        todo.push_back(v);
      }
    }
    if (todo.empty()) break;
    ++rep.passes;
    for (std::size_t v : todo) {
      if (tree.expand(v)) {
        ++rep.expanded;
      } else {
        rep.capped = true;
      }
    }
    if (rep.capped) break;
  }
  return rep;
}

TruncatedPwit adaptive_truncated_pwit(double alpha, PwitOptions options, std::uint64_t seed, const QuaternionPoint& u,
                                      const PwitClosure* closure, double tolerance, RefineReport* report) {
  TruncatedPwit tree(alpha, options, seed);
  const RefineReport rep = refine_truncated_pwit(tree, u, closure, tolerance);
  if (report) *report = rep;
  return tree;
}

RootResolvent root_resolvent(const TruncatedPwit& tree, const QuaternionPoint& u, const PwitClosure* closure) {
  RootResolvent out;
  out.block = root_resolvent_schur(tree, u, closure);
  const ResolventBlock direct = direct_root(tree, u, closure, out.sparse_solve);
  const cplx s[4] = {out.block.a, out.block.b, out.block.b_prime, out.block.c};
  const cplx d[4] = {direct.a, direct.b, direct.b_prime, direct.c};
  double scale = 1.0;
  for (int i = 0; i < 4; ++i) {
    out.solve_gap = std::max(out.solve_gap, std::abs(s[i] - d[i]));
    scale = std::max(scale, std::abs(s[i]));
  }
  if (!(out.solve_gap <= kTreeAgreementTol * scale)) {
    throw StructuralError("root_resolvent: tree recursion and direct solve differ by " +
                          std::to_string(out.solve_gap) + " (seed " + std::to_string(tree.seed()) + ")");
  }
  return out;
}

}  // namespace ht
