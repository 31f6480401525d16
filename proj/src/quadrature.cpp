#include "heavytail/quadrature.hpp"

#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace ht {

NodeSet composite_gauss_legendre(std::span<const double> breakpoints) {
  if (breakpoints.size() < 2) throw std::invalid_argument("composite_gauss_legendre: need two breakpoints");
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& abscissa = Rule::abscissa();
  const auto& weight = Rule::weights();
  NodeSet out;
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double lo = breakpoints[p], hi = breakpoints[p + 1];
    if (!(hi > lo)) throw std::invalid_argument("composite_gauss_legendre: breakpoints must increase");
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    // Boost stores the non-negative half of a symmetric rule.
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      if (abscissa[i] == 0.0) {
        out.nodes.push_back(mid);
        out.weights.push_back(half * weight[i]);
        continue;
      }
      out.nodes.push_back(mid - half * abscissa[i]);
      out.weights.push_back(half * weight[i]);
      out.nodes.push_back(mid + half * abscissa[i]);
      out.weights.push_back(half * weight[i]);
    }
  }
  return out;
}

}  // namespace ht
