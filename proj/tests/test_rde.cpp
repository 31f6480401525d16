#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "heavytail/random.hpp"
#include "heavytail/rde.hpp"
#include "heavytail/stable_law.hpp"
#include "heavytail/statistics.hpp"

namespace {

const ht::GEvaluator& quadrature(double beta) {
  static std::map<double, ht::GEvaluator> cache;
  auto it = cache.find(beta);
  if (it == cache.end()) it = cache.emplace(beta, ht::GEvaluator::quadrature(beta)).first;
  return it->second;
}

// G(y, r, t) by plain sampling, independent of the evaluator.
ht::Estimate g_by_sampling(double beta, double y, double r, double t, std::size_t samples, std::uint64_t seed) {
  const ht::StableLaw law(beta);
  ht::RandomStream rng(seed);
  std::vector<double> v(samples);
  for (double& x : v) {
    const double s = law.sample(rng), sp = law.sample(rng);
    x = std::pow((t / y + s) / (r + (t + y * s) * (t + y * sp)), beta);
  }
  return ht::mean_estimate(v);
}

TEST(ClosedForms, DensityAtOriginForAlphaOneIsOneOverPi) {
  EXPECT_NEAR(ht::density_origin(0.5), 1.0 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(ht::density_origin(0.5), 0.31831, 5e-6);
}

TEST(ClosedForms, FixedPointAtOriginSolvesG) {
  // G(y, 0, 0) = y^{-2 beta} E[S^{-beta}].
  for (double beta : {0.25, 0.5, 0.75}) {
    const double y = ht::y_star_origin(beta);
    const double moment = ht::StableLaw(beta).neg_moment(beta);
    EXPECT_NEAR(std::pow(y, -2.0 * beta) * moment, 1.0, 1e-10);
  }
}

class RdeByBeta : public ::testing::TestWithParam<double> {};

TEST_P(RdeByBeta, QuadratureSolverHitsOriginClosedForm) {
  const double beta = GetParam();
  const auto sol = ht::solve_y_star(quadrature(beta), 0.0, 0.0);
  EXPECT_NEAR(sol.y_star / ht::y_star_origin(beta), 1.0, 1e-8);
  EXPECT_LE(sol.residual, ht::kQuadratureSolveTolerance);
}

TEST_P(RdeByBeta, DensityAtOriginMatchesClosedForm) {
  const double beta = GetParam();
  const auto sol = ht::density_mu(quadrature(beta), 0.0);
  EXPECT_NEAR(sol.density / ht::density_origin(beta), 1.0, 1e-6);
}

TEST_P(RdeByBeta, MonteCarloSolverIsWithinTwoPercentAtOrigin) {
  const double beta = GetParam();
  const auto ev = ht::GEvaluator::monte_carlo(beta, 200000, 31);
  EXPECT_NEAR(ht::solve_y_star(ev, 0.0, 0.0).y_star / ht::y_star_origin(beta), 1.0, 0.02);
}

TEST_P(RdeByBeta, FixedPointIsDecreasingInRadius) {
  const double beta = GetParam();
  double prev = ht::solve_y_star(quadrature(beta), 0.0, 0.0).y_star;
  for (double r : {0.25, 1.0, 2.0, 4.0}) {
    const double y = ht::solve_y_star(quadrature(beta), r, 0.0).y_star;
    EXPECT_LT(y, prev) << "r = " << r;
    prev = y;
  }
}

INSTANTIATE_TEST_SUITE_P(Betas, RdeByBeta, ::testing::Values(0.25, 0.5, 0.75));

TEST(Rde, GIsDecreasingInY) {
  const std::vector<double> ys{0.05, 0.1, 0.3, 1.0, 3.0};
  EXPECT_TRUE(quadrature(0.75).decreasing_on(ys, 1.0, 0.5));
  EXPECT_TRUE(quadrature(0.5).decreasing_on(ys, 0.0, 0.0));
}

TEST(Rde, SolutionSatisfiesEquationUnderIndependentSampling) {
  for (const auto [r, t] : {std::pair{1.0, 1.0}, std::pair{1.0, 0.5}, std::pair{4.0, 0.0}}) {
    const double y = ht::solve_y_star(quadrature(0.75), r, t).y_star;
    const auto g = g_by_sampling(0.75, y, r, t, 400000, 5);
    EXPECT_NEAR(g.value, 1.0, 4.5 * g.std_error) << "r = " << r << ", t = " << t;
  }
}

TEST(Rde, MonteCarloAndQuadratureModesAgree) {
  const auto mc = ht::GEvaluator::monte_carlo(0.75, 300000, 9);
  for (const auto [r, t] : {std::pair{1.0, 0.5}, std::pair{2.25, 0.0}}) {
    const double a = ht::solve_y_star(mc, r, t).y_star;
    const double b = ht::solve_y_star(quadrature(0.75), r, t).y_star;
    EXPECT_NEAR(a / b, 1.0, 0.02);
  }
}

TEST(Rde, DerivativeMatchesFiniteDifference) {
  for (double beta : {0.5, 0.75}) {
    for (double r : {0.0, 0.5, 2.0}) {
      const auto d = ht::y_star_prime(quadrature(beta), r);
      EXPECT_LT(d.relative_gap, 0.03) << "beta = " << beta << ", r = " << r;
      EXPECT_LT(d.analytic, 0.0);
    }
  }
}

TEST(Rde, DensityIsPositiveAndDecaysRadially) {
  const std::vector<double> radii{0.0, 1.0, 2.0, 3.0};
  const auto rows = ht::density_profile(quadrature(0.75), radii);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].density, 0.0);
    EXPECT_LT(rows[i].density, rows[i - 1].density);
    EXPECT_FALSE(rows[i].derivative_warning);
  }
}

TEST(Rde, StieltjesLimitIsImaginaryAndBounded) {
  for (double t : {0.5, 1.0, 4.0}) {
    const auto m = ht::stieltjes_limit(quadrature(0.75), {1.0, 0.0}, t);
    EXPECT_EQ(m.real(), 0.0);
    EXPECT_GT(m.imag(), 0.0);
    EXPECT_LE(m.imag(), 1.0 / t);
  }
  // Far from the spectrum in t, m ~ i / t; the heavy tail makes the correction decay slowly.
  EXPECT_NEAR(ht::stieltjes_limit(quadrature(0.75), 0.0, 200.0).imag() * 200.0, 1.0, 5e-3);
  EXPECT_THROW(ht::stieltjes_limit(quadrature(0.75), 0.0, 0.0), std::invalid_argument);
}

TEST(Rde, TailReportCarriesBothShapes) {
  const std::vector<double> radii{3.0, 4.0};
  const auto rep = ht::tail_shape_report(quadrature(0.75), radii);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& row : rep.rows) {
    const double xa = std::pow(row.radius, 1.5);
    EXPECT_NEAR(row.log_ratio - row.corrected_log_ratio, -xa + 0.75 * xa, 1e-9);
  }
}

TEST(Rde, RejectsNegativeArguments) {
  EXPECT_THROW(ht::solve_y_star(quadrature(0.5), -1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(ht::GEvaluator::monte_carlo(0.5, 10, 1), std::invalid_argument);
}

}  // namespace
