// Acceptance run: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; otherwise only the numbered ones.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "heavytail/experiments.hpp"
#include "heavytail/heavy_matrix.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/population.hpp"
#include "heavytail/pwit.hpp"
#include "heavytail/random.hpp"
#include "heavytail/rde.hpp"
#include "heavytail/spectra.hpp"
#include "heavytail/stable_law.hpp"
#include "heavytail/statistics.hpp"

namespace {

using ht::cplx;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double rel(double value, double target) { return std::abs(value - target) / std::abs(target); }

unsigned workers() { return ht::default_workers(); }

void exact_identities(Outcome& out) {
  std::size_t cases = 0, failures = 0;
  double worst_tv = 0.0, worst_lp = 0.0, worst_bip = 0.0, worst_trace = 0.0;
  const ht::HeavyTailLaw law(1.5);
  for (const std::size_t n : {8, 12, 20}) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto m = ht::build_matrix(law, n, ht::substream_seed(1000 + n, s));
      const cplx z = std::polar(0.6, 2.0 * std::numbers::pi * static_cast<double>(s) / 50.0);
      ++cases;
      const auto rep = ht::identity_suite(m.entries, z);
      bool ok = rep.ok();
      for (const auto& c : rep.checks) {
        if (c.name == "negative_second_moment") worst_tv = std::max(worst_tv, c.worst);
      }
      for (const auto& c : ht::exact_oracle_checks(m.entries, z)) {
        ok = ok && c.passed;
        if (c.name == "log_potential") worst_lp = std::max(worst_lp, c.value);
        if (c.name == "bipartization_spectrum") worst_bip = std::max(worst_bip, c.value);
        if (c.name == "trace_formula") worst_trace = std::max(worst_trace, c.value);
      }
      if (!ok) ++failures;
    }
  }
  out.detail << cases - failures << "/" << cases << " matrices; worst log-potential " << worst_lp << ", bipartization "
             << worst_bip << ", trace " << worst_trace << ", negative second moment " << worst_tv;
  out.require(failures == 0, "identity or oracle violated");
  out.require(worst_tv < 1e-8, "negative second moment above 1e-8");
}

void stable_calibration(Outcome& out) {
  for (const double beta : {0.25, 0.5, 0.75}) {
    const ht::StableLaw law(beta);
    const double target = 1.0 / (std::tgamma(1.0 - beta) * std::tgamma(1.0 + beta));
    const double quad_err = rel(law.neg_moment(beta), target);
    ht::RandomStream rng(ht::substream_seed(2, static_cast<std::uint64_t>(beta * 100)));
    std::vector<double> xs(1000000);
    for (double& x : xs) x = std::pow(law.sample(rng), -beta);
    const auto e = ht::mean_estimate(xs);
    const double z = std::abs(e.value - target) / e.std_error;
    out.detail << "beta=" << beta << ": quad " << quad_err << ", MC " << z << " SE; ";
    out.require(quad_err < 1e-6, "quadrature moment");
    out.require(z < 4.0, "MC moment");
  }
  const ht::StableLaw half(0.5);
  double worst = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double x = 0.1 * std::pow(1000.0, k / 400.0);
    const double levy = 0.5 * std::pow(x, -1.5) * std::exp(-std::numbers::pi / (4.0 * x));
    worst = std::max(worst, rel(half.density(x), levy));
  }
  out.detail << "Levy density " << worst;
  out.require(worst < 1e-8, "Levy density");
}

void origin_fixed_point(Outcome& out) {
  for (const double alpha : {0.5, 1.0, 1.5}) {
    const auto ev = ht::GEvaluator::monte_carlo(alpha / 2.0, 1000000, 3);
    const double y = ht::solve_y_star(ev, 0.0, 0.0).y_star;
    const double gap = rel(y, ht::y_star_origin(alpha / 2.0));
    out.detail << "alpha=" << alpha << ": y=" << y << " gap " << gap << "; ";
    out.require(gap < 0.02, "alpha " + std::to_string(alpha));
  }
}

void origin_density(Outcome& out) {
  for (const double alpha : {0.5, 1.0, 1.5}) {
    const auto ev = ht::GEvaluator::quadrature(alpha / 2.0);
    const double d = ht::density_mu(ev, 0.0).density;
    const double target = alpha == 1.0 ? 1.0 / std::numbers::pi : ht::density_origin(alpha / 2.0);
    out.detail << "alpha=" << alpha << ": " << d << " vs " << target << "; ";
    out.require(rel(d, target) < 0.02, "alpha " + std::to_string(alpha));
  }
}

void radial_normalization(Outcome& out) {
  for (const auto [alpha, cutoff] : {std::pair{1.0, 10.0}, std::pair{1.5, 6.0}}) {
    const auto ev = ht::GEvaluator::quadrature(alpha / 2.0);
    const auto rep = ht::radial_normalization(ev, cutoff, 12, workers());
    out.detail << "alpha=" << alpha << ": core " << rep.core << " + tail " << rep.tail << " = " << rep.total << "; ";
    out.require(std::abs(rep.total - 1.0) < 0.03, "alpha " + std::to_string(alpha));
  }
}

void lepage(Outcome& out) {
  for (const double beta : {0.5, 0.75}) {
    const ht::NonnegativeLaw unit{[](ht::RandomStream&) { return 1.0; }, 1.0};
    const ht::NonnegativeLaw uniform{[](ht::RandomStream& r) { return r.uniform(); }, 1.0 / (1.0 + beta)};
    int k = 0;
    for (const auto* law : {&unit, &uniform}) {
      const auto rep = ht::lepage_reduce(2.0 * beta, 10000, *law, 10000, ht::substream_seed(6, 10 * beta + k));
      out.detail << "beta=" << beta << (k == 0 ? " Y=1" : " Y~U") << ": KS " << rep.ks_statistic
                 << " (mean-compensated " << rep.compensated_ks_statistic << "); ";
      out.require(rep.ks_statistic < 0.03, "KS");
      ++k;
    }
  }
}

void rde_triangle(Outcome& out) {
  const auto ev = ht::GEvaluator::quadrature(0.75);
  const std::pair<cplx, double> points[] = {{0.0, 1.0}, {1.0, 1.0}, {1.0, 0.5}};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [z, t] = points[i];
    ht::PopulationParams params;
    params.alpha = 1.5;
    params.z = z;
    params.t = t;
    ht::PopulationRunOptions opts;
    opts.size = 50000;
    opts.burn_in = 30;
    opts.measure = 30;
    opts.seed = ht::substream_seed(7, i);
    opts.workers = workers();
    const auto pop = ht::run_h_population(params, opts);
    const double y = ht::solve_y_star(ev, std::norm(z), t).y_star;
    const double moment_gap = rel(pop.beta_moment, std::pow(y, 0.75));

    ht::PwitProbeOptions po;
    po.trees = 800;
    po.seed = ht::substream_seed(20261014, i);
    po.workers = workers();
    const auto tree = ht::pwit_probe(1.5, z, t, pop.y_estimate, pop.mean, po);
    const double tree_gap = rel(tree.closed.value, pop.mean);
    out.detail << "(z,t)=(" << z.real() << "," << t << "): moment gap " << moment_gap << ", PWIT "
               << tree.closed.value << "+-" << tree.closed.std_error << " vs " << pop.mean << " gap " << tree_gap
               << " (" << tree.mean_vertices << " vertices); ";
    out.require(moment_gap < 0.03, "population moment");
    out.require(tree_gap < 0.05, "PWIT mean");
    out.require(tree.max_solve_gap < ht::kTreeAgreementTol, "tree solve agreement");
  }
}

void finite_n_stieltjes(Outcome& out) {
  const ht::HeavyTailLaw law(1.5);
  std::vector<cplx> values(20);
  ht::parallel_for(values.size(), workers(), [&](std::size_t s) {
    values[s] = ht::stieltjes_sv(ht::build_matrix(law, 500, ht::substream_seed(8, s)).entries, 1.0, cplx(0.0, 1.0));
  });
  const cplx mean = ht::pairwise_sum(values) / 20.0;
  const cplx limit = ht::stieltjes_limit(ht::GEvaluator::quadrature(0.75), 1.0, 1.0);
  const double gap = std::abs(mean - limit) / std::abs(limit);
  out.detail << "mean " << mean.imag() << "i vs limit " << limit.imag() << "i, gap " << gap;
  out.require(gap < 0.05, "gap");
}

void esd_vs_density(Outcome& out) {
  ht::ExperimentConfig cfg;
  cfg.kind = ht::ExperimentKind::esd_compare;
  cfg.alpha = 1.5;
  cfg.n = 1000;
  cfg.seeds = 10;
  cfg.seed = 9;
  const auto dir = std::filesystem::temp_directory_path() / "heavytail_acceptance_esd";
  const auto r = ht::run_experiment(cfg, {workers(), 0, dir});
  out.detail << r.summary;
  out.require(r.exit_status() == 0, "ESD bands");
}

void tail_shape(Outcome& out) {
  const std::vector<double> radii{3.0, 4.0, 5.0, 6.0};
  for (const double alpha : {1.0, 1.5}) {
    const auto rep = ht::tail_shape_report(ht::GEvaluator::quadrature(alpha / 2.0), radii, workers());
    out.detail << "alpha=" << alpha << ": drift " << rep.flatness << " (exp(-|z|^alpha) shape: "
               << rep.corrected_flatness << "); ";
    out.require(rep.flatness < 0.15, "alpha " + std::to_string(alpha) + " drift against exp(-(alpha/2)|z|^alpha)");
  }
}

void concentration(Outcome& out) {
  const std::size_t ns[] = {100, 200, 400};
  const auto rep = ht::concentration_probe(ht::HeavyTailLaw(1.5), [](double s) { return std::atan(s); }, ns, 200, 11,
                                           workers());
  for (const auto& row : rep.rows) out.detail << "n=" << row.n << " sd " << row.std_dev << "; ";
  out.detail << "slope " << rep.slope;
  out.require(rep.monotone_decrease, "monotone decrease");
  out.require(rep.slope >= -0.75 && rep.slope <= -0.25, "slope range");
}

void phase_independence(Outcome& out) {
  auto pooled = [](ht::PhaseKind phase, std::uint64_t seed) {
    const ht::HeavyTailLaw law(1.5, ht::EntryVariant::pareto_phase, phase);
    std::vector<std::vector<double>> parts(20);
    ht::parallel_for(parts.size(), workers(), [&](std::size_t s) {
      parts[s] = ht::singular_values(ht::build_matrix(law, 500, ht::substream_seed(seed, s)).entries, 1.0);
    });
    std::vector<double> all;
    for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return all;
  };
  const double ks = ht::ks_two_sample(pooled(ht::PhaseKind::circle, 12), pooled(ht::PhaseKind::sign, 13));
  out.detail << "KS " << ks;
  out.require(ks < 0.05, "KS");
}

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;  // 0: none stated
  std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "exact identity suite", 60, exact_identities},
      {2, "stable-law calibration", 120, stable_calibration},
      {3, "fixed point at the origin", 120, origin_fixed_point},
      {4, "density at zero", 300, origin_density},
      {5, "radial normalization", 600, radial_normalization},
      {6, "LePage reduction", 120, lepage},
      {7, "RDE consistency triangle", 600, rde_triangle},
      {8, "finite-n Stieltjes convergence", 600, finite_n_stieltjes},
      {9, "ESD vs limiting density", 900, esd_vs_density},
      {10, "tail shape", 600, tail_shape},
      {11, "concentration probe", 300, concentration},
      {12, "phase independence", 0, phase_independence},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.passed = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && seconds > c.budget_seconds) {
      out.passed = false;
      out.detail << " [over the " << c.budget_seconds << " s budget]";
    }
    std::printf("AC%-2d %s  %-32s %7.1fs  %s\n", c.id, out.passed ? "PASS" : "FAIL", c.title, seconds,
                out.detail.str().c_str());
    std::fflush(stdout);
    if (!out.passed) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
