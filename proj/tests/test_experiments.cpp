#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "heavytail/config.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/experiments.hpp"
#include "heavytail/heavy_matrix.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("heavytail_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(EqualAreaEdges, SplitTheDiscEvenly) {
  const auto e = ht::equal_area_edges(3.0, 9);
  ASSERT_EQ(e.size(), 10u);
  EXPECT_EQ(e.front(), 0.0);
  EXPECT_DOUBLE_EQ(e.back(), 3.0);
  for (std::size_t k = 0; k + 1 < e.size(); ++k) EXPECT_NEAR(e[k + 1] * e[k + 1] - e[k] * e[k], 1.0, 1e-12);
}

TEST(CompareEsd, TheoryAgainstItselfIsZero) {
  const auto ev = ht::GEvaluator::quadrature(0.75);
  const auto h = ht::theory_histogram(ev, ht::equal_area_edges(2.0, 4));
  const auto dev = ht::compare_esd(h, h);
  EXPECT_EQ(dev.sup_abs, 0.0);
  EXPECT_EQ(dev.l1, 0.0);
  EXPECT_GT(dev.peak, 0.0);
}

TEST(CompareEsd, AngularStatisticFlagsAnisotropy) {
  ht::RadialHistogram h{{0.0, 1.0}, {1.0}};
  std::vector<ht::cplx> line(400, ht::cplx(0.5, 0.0));
  EXPECT_LT(ht::compare_esd(h, h, line).angular.p_value, 1e-6);
  std::vector<ht::cplx> circle;
  for (int k = 0; k < 400; ++k) circle.push_back(std::polar(0.5, 2.0 * std::numbers::pi * (k + 0.5) / 400.0));
  EXPECT_GT(ht::compare_esd(h, h, circle).angular.p_value, 0.99);
}

TEST(TheoryHistogram, MatchesDensityNearOrigin) {
  // A thin disc around 0 holds about pi r^2 density(0).
  const auto ev = ht::GEvaluator::quadrature(0.5);
  const auto h = ht::theory_histogram(ev, {0.0, 0.01});
  EXPECT_NEAR(h.mass[0] / (std::numbers::pi * 1e-4 * ht::density_origin(0.5)), 1.0, 3e-3);
}

TEST(RadialNormalization, TotalMassIsOne) {
  const auto ev = ht::GEvaluator::quadrature(0.75);
  const auto rep = ht::radial_normalization(ev, 6.0);
  EXPECT_NEAR(rep.total, 1.0, 0.03);
  EXPECT_LT(rep.tail, 1e-3);
}

TEST(ExactOracles, PassOnRandomMatrices) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = ht::build_matrix(ht::HeavyTailLaw(1.0), 10, seed);
    for (const auto& c : ht::exact_oracle_checks(m.entries, ht::cplx(0.1, 0.2))) EXPECT_TRUE(c.passed) << c.name;
  }
}

TEST(RunExperiment, IdentitiesSummaryAndManifest) {
  auto cfg = ht::parse_config("kind = identities\nn = 12\nseeds = 50\n");
  const auto dir = scratch("identities");
  const auto r = ht::run_experiment(cfg, {1, 0, dir});
  EXPECT_EQ(r.summary.substr(0, 33), "6/6 identities, 50/50 seeds pass;");
  EXPECT_EQ(r.exit_status(), 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["kind"], "identities");
  EXPECT_EQ(manifest["exit_status"], 0);
  EXPECT_EQ(manifest["version"], HEAVYTAIL_VERSION);
  EXPECT_EQ(ht::parse_config(manifest["config"].get<std::string>()), r.config);
  EXPECT_TRUE(fs::exists(dir / "identities.csv"));
}

TEST(RunExperiment, OutputsAreByteIdenticalAcrossRunsAndWorkers) {
  const auto cfg = ht::parse_config(
      "kind = stieltjes-compare\nalpha = 1.5\nn = 40\nseeds = 6\n[stieltjes-compare]\nband = 1\n");
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  const auto ra = ht::run_experiment(cfg, {1, 0, a});
  const auto rb = ht::run_experiment(cfg, {3, 0, b});
  ASSERT_EQ(ra.files, rb.files);
  for (const auto& f : ra.files) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const auto c = scratch("repro_c");
  const auto rc = ht::run_experiment(cfg, {1, 1, c});
  EXPECT_NE(slurp(a / "stieltjes_samples.csv"), slurp(c / "stieltjes_samples.csv"));
}

TEST(RunExperiment, DensityProfileAtOriginForAlphaOne) {
  const auto cfg = ht::parse_config("kind = density-profile\nalpha = 1\n[density-profile]\nradii = 0\n");
  const auto dir = scratch("density");
  const auto r = ht::run_experiment(cfg, {1, 0, dir});
  EXPECT_EQ(r.exit_status(), 0);
  const auto csv = slurp(dir / "density_profile.csv");
  EXPECT_NE(csv.find("0.3183098861837"), std::string::npos) << csv;
}

TEST(RunExperiment, ExitStatusFollowsDeclaredBands) {
  const auto strict =
      ht::parse_config("kind = tail-report\nalpha = 1.5\n[tail-report]\nradii = 3, 4, 5\nband = 1e-6\n");
  EXPECT_EQ(ht::run_experiment(strict, {1, 0, scratch("tail_strict")}).exit_status(), 1);
  const auto loose = ht::parse_config("kind = tail-report\nalpha = 1.5\n[tail-report]\nradii = 3, 4, 5\nband = 10\n");
  EXPECT_EQ(ht::run_experiment(loose, {1, 0, scratch("tail_loose")}).exit_status(), 0);
}

TEST(RunExperiment, RefusesOversizedMatrices) {
  const auto cfg = ht::parse_config("kind = esd-compare\nn = 100000\n");
  EXPECT_THROW(ht::run_experiment(cfg, {1, 0, scratch("huge")}), ht::ResourceLimit);
}

TEST(PwitProbe, MatchesPopulationStatisticsRoughly) {
  ht::PwitProbeOptions opts;
  opts.trees = 20;
  opts.depth = 4;
  opts.branching = 20;
  opts.checked_trees = 2;
  const auto p = ht::pwit_probe(1.5, 1.0, 1.0, 0.307, 0.317, opts);
  EXPECT_NEAR(p.closed.value, 0.317, 5.0 * p.closed.std_error + 0.02);
  EXPECT_LT(p.max_solve_gap, 1e-12);
  EXPECT_GT(p.mean_vertices, 1.0);
}

TEST(VerifySuite, ExactSuitePasses) {
  const auto s = ht::verify_suite("exact");
  EXPECT_EQ(s.exit_status(), 0);
  EXPECT_EQ(s.checks.size(), 27u);
  EXPECT_THROW(ht::verify_suite("fast"), std::invalid_argument);
}

}  // namespace
