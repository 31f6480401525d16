#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ht {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Adaptive 31-point Gauss-Kronrod on [a, b]; a or b may be infinite.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 15) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &err);
  return {v, err};
}

struct NodeSet {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Composite 20-point Gauss-Legendre rule over consecutive panels given by sorted breakpoints.
NodeSet composite_gauss_legendre(std::span<const double> breakpoints);

}  // namespace ht
