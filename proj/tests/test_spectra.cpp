#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "heavytail/heavy_matrix.hpp"
#include "heavytail/spectra.hpp"

namespace {

using ht::cplx;

TEST(Eigenvalues, TriangularMatrixGivesItsDiagonal) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(4, 4);
  a(0, 0) = 1.0;
  a(1, 1) = cplx(0.0, -3.0);
  a(2, 2) = 2.0;
  a(3, 3) = cplx(-0.5, 0.5);
  a(0, 2) = 7.0;
  a(1, 3) = cplx(1.0, 1.0);
  const auto ev = ht::eigenvalues(a);
  ASSERT_EQ(ev.size(), 4u);
  EXPECT_NEAR(std::abs(ev[0] - cplx(0.0, -3.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(ev[1] - 2.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(ev[2] - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(ev[3] - cplx(-0.5, 0.5)), 0.0, 1e-12);
}

TEST(Eigenvalues, SumEqualsTraceAndProductDeterminant) {
  const ht::HeavyTailLaw law(1.2);
  const auto m = ht::build_matrix(law, 30, 8);
  const auto ev = ht::eigenvalues(m);
  cplx sum = 0.0, logdet = 0.0;
  for (const auto& l : ev) {
    sum += l;
    logdet += std::log(l);
  }
  EXPECT_NEAR(std::abs(sum - m.entries.trace()), 0.0, 1e-10 * m.entries.norm());
  const double log_abs_det = std::log(std::abs(m.entries.fullPivLu().determinant()));
  EXPECT_NEAR(logdet.real(), log_abs_det, 1e-9);
}

TEST(SingularValues, BothPathsAgree) {
  const ht::HeavyTailLaw law(0.9);
  const auto m = ht::build_matrix(law, 16, 3);
  const auto a = ht::singular_values(m.entries, cplx(0.2, 0.1), ht::SvPath::svd);
  const auto b = ht::singular_values(m.entries, cplx(0.2, 0.1), ht::SvPath::bipartization);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-10 * a.front());
  for (std::size_t k = 1; k < a.size(); ++k) EXPECT_LE(a[k], a[k - 1]);
}

TEST(LogPotential, SingularMatrixIsMinusInfinity) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(3, 3);
  EXPECT_EQ(ht::log_potential(a, 1.0), -std::numeric_limits<double>::infinity());
  EXPECT_NEAR(ht::log_potential(a, 0.0), 0.0, 1e-15);
}

TEST(RowDistances, OrthogonalRowsKeepTheirNorms) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(3, 3);
  a(0, 0) = 2.0;
  a(1, 1) = 3.0;
  a(2, 2) = cplx(0.0, 4.0);
  const auto d = ht::row_distances(a);
  EXPECT_NEAR(d[0], 2.0, 1e-14);
  EXPECT_NEAR(d[1], 3.0, 1e-14);
  EXPECT_NEAR(d[2], 4.0, 1e-14);
}

class IdentitySuite : public ::testing::TestWithParam<double> {};

TEST_P(IdentitySuite, HoldsOnRandomSamples) {
  const ht::HeavyTailLaw law(GetParam());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = ht::build_matrix(law, 15, seed);
    const auto rep = ht::identity_suite(m.entries, cplx(0.5, -0.25));
    EXPECT_TRUE(rep.ok()) << "seed " << seed;
    EXPECT_EQ(rep.checks.size(), 6u);
  }
}

INSTANTIATE_TEST_SUITE_P(Alphas, IdentitySuite, ::testing::Values(0.5, 1.0, 1.5, 1.9));

TEST(IdentitySuite, ScaledRowsStillSatisfyBounds) {
  // One huge row: the row-distance bounds and interlacing still hold.
  const ht::HeavyTailLaw law(1.5);
  auto m = ht::build_matrix(law, 12, 2).entries;
  m.row(4) *= 1e6;
  EXPECT_TRUE(ht::identity_suite(m).ok());
}

TEST(RadialHistogram, MassesAddToFractionInside) {
  ht::EmpiricalMeasure mu;
  mu.atoms = {0.1, cplx(0.0, 0.6), -0.9, 1.5, cplx(3.0, 3.0)};
  const auto h = ht::radial_histogram(mu, {0.0, 0.5, 1.0, 2.0});
  EXPECT_DOUBLE_EQ(h.mass[0], 0.2);
  EXPECT_DOUBLE_EQ(h.mass[1], 0.4);
  EXPECT_DOUBLE_EQ(h.mass[2], 0.2);
  EXPECT_NEAR(h.density()[0], 0.2 / (std::numbers::pi * 0.25), 1e-15);
  EXPECT_THROW(ht::radial_histogram(mu, {1.0, 0.5}), std::invalid_argument);
}

TEST(Concentration, SpreadShrinksWithDimension) {
  const ht::HeavyTailLaw law(1.5);
  const std::size_t ns[] = {20, 80};
  const auto rep = ht::concentration_probe(law, [](double s) { return std::atan(s); }, ns, 60, 5);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_LT(rep.rows[1].std_dev, rep.rows[0].std_dev);
  EXPECT_TRUE(rep.monotone_decrease);
}

}  // namespace
