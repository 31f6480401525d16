#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "heavytail/errors.hpp"
#include "heavytail/quadrature.hpp"
#include "heavytail/random.hpp"
#include "heavytail/stable_law.hpp"
#include "heavytail/statistics.hpp"

namespace {

// E[S^{-p}] for Laplace transform exp(-c x^beta): Gamma(1 + p/beta) / (Gamma(1 + p) c^{p/beta}).
double negative_moment_oracle(double beta, double p) {
  const double c = std::tgamma(1.0 - beta);
  return std::tgamma(1.0 + p / beta) / (std::tgamma(1.0 + p) * std::pow(c, p / beta));
}

class StableByBeta : public ::testing::TestWithParam<double> {};

TEST_P(StableByBeta, NegativeMomentsMatchClosedForm) {
  const double beta = GetParam();
  const ht::StableLaw law(beta);
  for (double p : {0.3, beta, 1.0, 2.0}) {
    EXPECT_NEAR(law.neg_moment(p) / negative_moment_oracle(beta, p), 1.0, 1e-8) << "p = " << p;
  }
  EXPECT_NEAR(law.neg_moment(beta) * std::tgamma(1.0 - beta) * std::tgamma(1.0 + beta), 1.0, 1e-10);
}

TEST_P(StableByBeta, PowerDensityStartsAtOneAndIntegratesToOne) {
  const double beta = GetParam();
  const ht::StableLaw law(beta);
  EXPECT_DOUBLE_EQ(law.power_density(0.0), 1.0);
  const double mass =
      ht::integrate([&](double u) { return law.power_density(u); }, 0.0, law.power_density_limit(), 1e-12).value;
  // Mass above power_density_limit() is dropped; about 1e-5 at beta = 0.75.
  EXPECT_NEAR(mass, 1.0, 5e-5);
  const double first =
      ht::integrate([&](double u) { return u * law.power_density(u); }, 0.0, law.power_density_limit(), 1e-12).value;
  EXPECT_NEAR(first, negative_moment_oracle(beta, beta), 5e-5);
}

TEST_P(StableByBeta, SamplerMatchesLaplaceTransform) {
  const double beta = GetParam();
  const ht::StableLaw law(beta);
  ht::RandomStream rng(ht::substream_seed(99, static_cast<std::uint64_t>(beta * 1000)));
  for (double x : {0.5, 1.0, 3.0}) {
    std::vector<double> v(100000);
    for (double& e : v) e = std::exp(-x * law.sample(rng));
    const auto est = ht::mean_estimate(v);
    EXPECT_NEAR(est.value, law.laplace_transform(x), 4.5 * est.std_error) << "x = " << x;
    EXPECT_NEAR(law.laplace_transform(x), std::exp(-std::tgamma(1.0 - beta) * std::pow(x, beta)), 1e-15);
  }
}

TEST_P(StableByBeta, TruncatedBetaMomentMatchesSampling) {
  const double beta = GetParam();
  const ht::StableLaw law(beta);
  ht::RandomStream rng(7);
  for (double t : {0.5, 2.0}) {
    std::vector<double> v(200000);
    for (double& e : v) {
      const double s = law.sample(rng);
      e = s <= t ? std::pow(s, beta) : 0.0;
    }
    const auto est = ht::mean_estimate(v);
    EXPECT_NEAR(law.truncated_beta_moment(t), est.value, 4.5 * est.std_error) << "t = " << t;
  }
}

INSTANTIATE_TEST_SUITE_P(Betas, StableByBeta, ::testing::Values(0.25, 0.5, 0.75));

TEST(StableLaw, HalfIsLevyLaw) {
  // exp(-sqrt(pi x)) is the Laplace transform of the Levy law with scale pi/2.
  const ht::StableLaw law(0.5);
  for (double x : {0.1, 0.3, 1.0, 4.0, 20.0, 100.0}) {
    const double levy = 0.5 * std::pow(x, -1.5) * std::exp(-std::numbers::pi / (4.0 * x));
    EXPECT_NEAR(law.density(x) / levy, 1.0, 1e-8) << "x = " << x;
  }
}

TEST(StableLaw, DensityNearZeroReportsNonConvergence) {
  const ht::StableLaw law(0.75, ht::SeriesOptions{20, 1e-14});
  EXPECT_THROW(law.density(0.01), ht::NonConvergence);
}

TEST(StableLaw, RejectsBetaOutsideUnitInterval) {
  EXPECT_THROW(ht::StableLaw(0.0), std::invalid_argument);
  EXPECT_THROW(ht::StableLaw(1.0), std::invalid_argument);
}

TEST(PoissonWeights, AreDecreasingPowersOfArrivals) {
  ht::RandomStream rng(3);
  const auto w = ht::sample_poisson_weights(1.5, 500, rng);
  ASSERT_EQ(w.truncation_count(), 500u);
  for (std::size_t k = 1; k < w.points.size(); ++k) EXPECT_LT(w.points[k], w.points[k - 1]);
  const std::vector<double> arrivals{1.0, 4.0};
  const auto fixed = ht::poisson_weights_from_arrivals(1.0, arrivals);
  EXPECT_DOUBLE_EQ(fixed.points[0], 1.0);
  EXPECT_DOUBLE_EQ(fixed.points[1], 1.0 / 16.0);
}

TEST(PoissonWeights, TailMassClosedForm) {
  // alpha = 1: sum_{k > K} of x_k^{-2} has conditional mean K^{-1}.
  EXPECT_NEAR(ht::poisson_tail_mass(1.0, 100), 0.01, 1e-15);
  EXPECT_NEAR(ht::poisson_tail_mass(1.5, 8), std::pow(8.0, -1.0 / 3.0) / (1.0 / 3.0), 1e-14);
}

TEST(LePage, WeightedSumMatchesScaledStable) {
  const ht::NonnegativeLaw uniform{[](ht::RandomStream& rng) { return rng.uniform(); }, 2.0 / 3.0};
  const auto rep = ht::lepage_reduce(1.0, 2000, uniform, 3000, 21);
  EXPECT_LT(rep.ks_statistic, rep.ks_threshold);
  EXPECT_NEAR(rep.scale, std::pow(2.0 / 3.0, 2.0), 1e-12);
}

TEST(LePage, TruncationBiasIsRemovedByMeanCompensation) {
  // At beta = 0.75 the dropped terms shift the sum visibly in KS; adding their mean removes it.
  const ht::NonnegativeLaw uniform{[](ht::RandomStream& rng) { return rng.uniform(); }, 1.0 / 1.75};
  const auto rep = ht::lepage_reduce(1.5, 2000, uniform, 3000, 21);
  EXPECT_GT(rep.ks_statistic, rep.compensated_ks_statistic);
  EXPECT_LT(rep.compensated_ks_statistic, rep.ks_threshold);
  EXPECT_NEAR(rep.scale, std::pow(1.0 / 1.75, 1.0 / 0.75), 1e-12);
}

}  // namespace
