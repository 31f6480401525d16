#include "heavytail/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "heavytail/bipartize.hpp"
#include "heavytail/csv.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/heavy_matrix.hpp"
#include "heavytail/parallel.hpp"
#include "heavytail/pwit.hpp"
#include "heavytail/quadrature.hpp"
#include "heavytail/random.hpp"
#include "heavytail/stable_law.hpp"

namespace ht {

std::vector<double> equal_area_edges(double r_max, std::size_t bins) {
  if (!(r_max > 0.0) || bins < 1) throw std::invalid_argument("equal_area_edges: need r_max > 0 and bins >= 1");
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    edges[k] = r_max * std::sqrt(static_cast<double>(k) / static_cast<double>(bins));
  }
  return edges;
}

RadialHistogram theory_histogram(const GEvaluator& ev, const std::vector<double>& edges, unsigned workers) {
  if (edges.size() < 2 || edges.front() < 0.0 || !std::is_sorted(edges.begin(), edges.end())) {
    throw std::invalid_argument("theory_histogram: edges must be nonnegative and increasing");
  }
  std::vector<std::size_t> bin_of;
  std::vector<double> radii, weights;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double panel[2] = {edges[b], edges[b + 1]};
    const NodeSet rule = composite_gauss_legendre(panel);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      bin_of.push_back(b);
      radii.push_back(rule.nodes[i]);
      weights.push_back(rule.weights[i]);
    }
  }
  const auto profile = density_profile(ev, radii, SolveOptions{0.0, false}, workers);
  RadialHistogram h;
  h.edges = edges;
  h.mass.assign(edges.size() - 1, 0.0);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    h.mass[bin_of[i]] += weights[i] * 2.0 * std::numbers::pi * radii[i] * profile[i].density;
  }
  return h;
}

EsdDeviation compare_esd(const RadialHistogram& empirical, const RadialHistogram& theory, std::span<const cplx> atoms,
                         std::size_t sectors) {
  if (empirical.edges != theory.edges) throw std::invalid_argument("compare_esd: histograms use different edges");
  EsdDeviation dev;
  const auto de = empirical.density();
  const auto dt = theory.density();
  for (std::size_t i = 0; i < de.size(); ++i) {
    dev.sup_abs = std::max(dev.sup_abs, std::abs(de[i] - dt[i]));
    dev.peak = std::max(dev.peak, dt[i]);
    dev.l1 += std::abs(empirical.mass[i] - theory.mass[i]);
  }
  dev.sup_relative = dev.peak > 0.0 ? dev.sup_abs / dev.peak : 0.0;
  dev.sectors = sectors;
  if (!atoms.empty() && sectors >= 2) {
    std::vector<std::size_t> counts(sectors, 0);
    for (const cplx& w : atoms) {
      double phi = std::arg(w);
      if (phi < 0.0) phi += 2.0 * std::numbers::pi;
      auto k = static_cast<std::size_t>(phi / (2.0 * std::numbers::pi) * static_cast<double>(sectors));
      counts[std::min(k, sectors - 1)]++;
    }
    dev.angular = chi_square_uniform(counts);
  }
  return dev;
}

NormalizationReport radial_normalization(const GEvaluator& ev, double cutoff, int panels, unsigned workers) {
  if (!(cutoff > 0.0) || panels < 1) throw std::invalid_argument("radial_normalization: need cutoff > 0, panels >= 1");
  std::vector<double> breaks(static_cast<std::size_t>(panels) + 1);
  for (int k = 0; k <= panels; ++k) breaks[static_cast<std::size_t>(k)] = cutoff * k / panels;
  const NodeSet rule = composite_gauss_legendre(breaks);
  std::vector<double> radii = rule.nodes;
  radii.push_back(cutoff);
  const auto profile = density_profile(ev, radii, SolveOptions{0.0, false}, workers);
  NormalizationReport rep;
  rep.cutoff = cutoff;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rep.core += rule.weights[i] * 2.0 * std::numbers::pi * rule.nodes[i] * profile[i].density;
  }
  const double alpha = 2.0 * ev.beta();
  const double ca = std::pow(cutoff, alpha);
  const double amplitude = profile.back().density / (std::pow(cutoff, 2.0 * (alpha - 1.0)) * std::exp(-ca));
  rep.tail = 2.0 * std::numbers::pi * amplitude / alpha * (1.0 + ca) * std::exp(-ca);
  rep.total = rep.core + rep.tail;
  return rep;
}

PwitProbe pwit_probe(double alpha, cplx z, double t, double y_scale, double h_mean, const PwitProbeOptions& options) {
  if (options.trees < 2) throw std::invalid_argument("pwit_probe: need at least two trees");
  const QuaternionPoint u(z, cplx(0.0, t));
  const PwitClosure closure = closure_from_h_law(y_scale, h_mean);
  std::vector<double> closed(options.trees), raw(options.trees), sizes(options.trees), gaps(options.trees, 0.0);
  std::vector<char> capped(options.trees, 0);
  parallel_for(options.trees, options.workers, [&](std::size_t i) {
    RefineReport rep;
    const TruncatedPwit tree =
        adaptive_truncated_pwit(alpha, PwitOptions{options.depth, options.branching, 400000},
                                substream_seed(options.seed, i), u, &closure, options.tolerance, &rep);
    if (i < options.checked_trees) {
      const RootResolvent root = root_resolvent(tree, u, &closure);
      closed[i] = root.block.a.imag();
      gaps[i] = root.solve_gap;
    } else {
      closed[i] = root_resolvent_schur(tree, u, &closure).a.imag();
    }
    raw[i] = root_resolvent_schur(tree, u, nullptr).a.imag();
    sizes[i] = static_cast<double>(tree.size());
    capped[i] = rep.capped ? 1 : 0;
  });
  PwitProbe out;
  out.closed = mean_estimate(closed);
  out.raw = mean_estimate(raw);
  out.mean_vertices = pairwise_sum(sizes) / static_cast<double>(options.trees);
  out.max_solve_gap = *std::max_element(gaps.begin(), gaps.end());
  out.capped = static_cast<std::size_t>(std::count(capped.begin(), capped.end(), 1));
  return out;
}

std::vector<CheckResult> exact_oracle_checks(const Eigen::MatrixXcd& a, cplx z) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXcd shifted = a - z * Eigen::MatrixXcd::Identity(n, n);
  const auto s = singular_values(a, z);
  const double s_max = s.empty() ? 1.0 : std::max(1.0, s.front());
  std::vector<CheckResult> out;

  {
    const double lp = log_potential(a, z);
    const auto s_bip = singular_values(a, z, SvPath::bipartization);
    double mean_log = 0.0;
    for (double v : s_bip) mean_log += std::log(v);
    mean_log /= static_cast<double>(n);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
    double det_log = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) det_log += std::log(std::abs(lu.matrixLU()(i, i)));
    det_log /= static_cast<double>(n);
    const double scale = std::max(1.0, std::abs(lp));
    const double err = std::max(std::abs(lp - mean_log), std::abs(lp - det_log)) / scale;
    out.push_back({"log_potential", err < 1e-9, err, 1e-9, ""});
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bipartized_matrix(a, z), Eigen::EigenvaluesOnly);
    std::vector<double> expected;
    for (double v : s) {
      expected.push_back(v);
      expected.push_back(-v);
    }
    std::sort(expected.begin(), expected.end());
    double err = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      err = std::max(err, std::abs(es.eigenvalues()(static_cast<Eigen::Index>(i)) - expected[i]));
    }
    err /= s_max;
    out.push_back({"bipartization_spectrum", err < 1e-10, err, 1e-10, ""});
  }
  {
    double err = 0.0;
    for (const cplx eta : {cplx(0.0, 1.0), cplx(0.4, 0.3), cplx(-1.2, 0.05)}) {
      cplx oracle = 0.0;
      for (double v : s) oracle += 1.0 / (v - eta) + 1.0 / (-v - eta);
      oracle /= 2.0 * static_cast<double>(n);
      err = std::max(err, std::abs(stieltjes_sv(a, z, eta) - oracle) / std::abs(oracle));
    }
    out.push_back({"trace_formula", err < 1e-10, err, 1e-10, ""});
  }
  return out;
}

int RunResult::exit_status() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; }) ? 0 : 1;
}

int SuiteResult::exit_status() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; }) ? 0 : 1;
}

namespace {

using Clock = std::chrono::steady_clock;

double relative_gap(double value, double target) { return std::abs(value - target) / std::abs(target); }

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

GEvaluator make_evaluator(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& default_mode) {
  const std::string mode = cfg.text("mode", default_mode);
  const double beta = cfg.alpha / 2.0;
  if (mode == "quadrature") return GEvaluator::quadrature(beta);
  if (mode == "mc") {
    return GEvaluator::monte_carlo(beta, cfg.samples > 0 ? cfg.samples : 1000000, seed);
  }
  throw ConfigError("mode must be 'quadrature' or 'mc', got '" + mode + "'", 0, "mode");
}

HeavyTailLaw make_law(const ExperimentConfig& cfg) {
  return HeavyTailLaw(cfg.alpha, parse_entry_variant(cfg.text("entries", "pareto_phase")),
                      parse_phase_kind(cfg.text("phase", "circle")));
}

cplx config_z(const ExperimentConfig& cfg, double re, double im = 0.0) {
  return {cfg.real("z_re", re), cfg.real("z_im", im)};
}

struct Context {
  ExperimentConfig cfg;
  std::uint64_t seed = 1;  // base seed plus offset
  unsigned workers = 1;
  std::filesystem::path dir;
  RunResult* result = nullptr;

  std::filesystem::path file(const std::string& name) const {
    result->files.push_back(name);
    return dir / name;
  }
  void check(CheckResult c) const { result->checks.push_back(std::move(c)); }
};

void run_stable_checks(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double beta = cfg.alpha / 2.0;
  SeriesOptions series;
  series.max_terms = static_cast<int>(cfg.count("series_terms", 200));
  const StableLaw law(beta, series);
  const double target = 1.0 / (std::tgamma(1.0 - beta) * std::tgamma(1.0 + beta));

  CsvWriter out(ctx.file("stable_checks.csv"), {"check", "value", "target", "error", "threshold", "passed"});
  auto record = [&](const std::string& name, double value, double tgt, double err, double thr, bool ok) {
    out.row({name, format_real(value), format_real(tgt), format_real(err), format_real(thr), ok ? "1" : "0"});
    ctx.check({name, ok, err, thr, ""});
  };

  const double quad = law.neg_moment(beta);
  record("neg_moment_quadrature", quad, target, relative_gap(quad, target), 1e-6, relative_gap(quad, target) < 1e-6);

  const std::size_t samples = cfg.samples > 0 ? cfg.samples : 1000000;
  const std::size_t blocks = 64;
  std::vector<std::vector<double>> parts(blocks);
  parallel_for(blocks, ctx.workers, [&](std::size_t b) {
    RandomStream rng(substream_seed(substream_seed(ctx.seed, 0), b));
    const std::size_t lo = samples * b / blocks, hi = samples * (b + 1) / blocks;
    parts[b].resize(hi - lo);
    for (double& x : parts[b]) x = std::pow(law.sample(rng), -beta);
  });
  std::vector<double> xs;
  xs.reserve(samples);
  for (const auto& p : parts) xs.insert(xs.end(), p.begin(), p.end());
  const Estimate mc = mean_estimate(xs);
  const double z_score = std::abs(mc.value - target) / mc.std_error;
  record("neg_moment_mc", mc.value, target, z_score, 4.0, z_score < 4.0);

  if (std::abs(beta - 0.5) < 1e-12) {
    // Laplace transform exp(-sqrt(pi x)): Levy law with scale pi/2.
    double worst = 0.0;
    for (int k = 0; k <= 300; ++k) {
      const double x = 0.1 * std::pow(1000.0, k / 300.0);
      const double levy = 0.5 * std::pow(x, -1.5) * std::exp(-std::numbers::pi / (4.0 * x));
      worst = std::max(worst, relative_gap(law.density(x), levy));
    }
    record("levy_density", worst, 0.0, worst, 1e-8, worst < 1e-8);
  }

  const std::size_t truncation = cfg.count("lepage_truncation", 10000);
  const std::size_t lepage_samples = cfg.count("lepage_samples", 10000);
  const NonnegativeLaw unit{[](RandomStream&) { return 1.0; }, 1.0};
  const NonnegativeLaw uniform{[](RandomStream& rng) { return rng.uniform(); }, 1.0 / (1.0 + beta)};
  const std::pair<std::string, const NonnegativeLaw*> laws[] = {{"lepage_unit", &unit}, {"lepage_uniform", &uniform}};
  for (std::size_t i = 0; i < 2; ++i) {
    const LePageReport rep =
        lepage_reduce(cfg.alpha, truncation, *laws[i].second, lepage_samples, substream_seed(ctx.seed, 1 + i));
    record(laws[i].first, rep.ks_statistic, 0.0, rep.ks_statistic, 0.03, rep.ks_statistic < 0.03);
  }
}

void run_identities(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const std::size_t n = cfg.n > 0 ? cfg.n : 12;
  const HeavyTailLaw law = make_law(cfg);
  const cplx z = config_z(cfg, 0.0);
  std::vector<IdentityReport> reports(cfg.seeds);
  std::vector<std::vector<CheckResult>> oracles(cfg.seeds);
  parallel_for(cfg.seeds, ctx.workers, [&](std::size_t s) {
    const MatrixSample m = build_matrix(law, n, substream_seed(ctx.seed, s));
    reports[s] = identity_suite(m.entries, z);
    oracles[s] = exact_oracle_checks(m.entries, z);
  });

  CsvWriter out(ctx.file("identities.csv"), {"seed_index", "check", "status", "worst"});
  std::vector<std::string> names;
  std::map<std::string, std::pair<bool, double>> summary;  // all seeds pass, worst value
  std::map<std::string, std::pair<bool, double>> oracle_summary;
  std::size_t seeds_ok = 0;
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    bool ok = true;
    for (const auto& c : reports[s].checks) {
      const bool pass = c.status != CheckStatus::fail;
      if (!summary.count(c.name)) {
        names.push_back(c.name);
        summary[c.name] = {true, 0.0};
      }
      summary[c.name].first = summary[c.name].first && pass;
      summary[c.name].second = std::max(summary[c.name].second, c.worst);
      ok = ok && pass;
      const char* status = c.status == CheckStatus::pass ? "pass" : c.status == CheckStatus::fail ? "fail" : "skipped";
      out.row({std::to_string(s), c.name, status, format_real(c.worst)});
    }
    for (const auto& c : oracles[s]) {
      auto& entry = oracle_summary.try_emplace(c.name, true, 0.0).first->second;
      entry.first = entry.first && c.passed;
      entry.second = std::max(entry.second, c.value);
      ok = ok && c.passed;
      out.row({std::to_string(s), c.name, c.passed ? "pass" : "fail", format_real(c.value)});
    }
    if (ok) ++seeds_ok;
  }
  std::size_t identities_ok = 0;
  for (const auto& name : names) {
    const auto& [pass, worst] = summary[name];
    if (pass) ++identities_ok;
    ctx.check({name, pass, worst, 0.0, "over " + std::to_string(cfg.seeds) + " seeds"});
  }
  std::size_t oracles_ok = 0;
  for (const auto& [name, entry] : oracle_summary) {
    if (entry.first) ++oracles_ok;
    ctx.check({name, entry.first, entry.second, name == "log_potential" ? 1e-9 : 1e-10, ""});
  }
  ctx.result->summary = std::to_string(identities_ok) + "/" + std::to_string(names.size()) + " identities, " +
                        std::to_string(seeds_ok) + "/" + std::to_string(cfg.seeds) + " seeds pass; " +
                        std::to_string(oracles_ok) + "/" + std::to_string(oracle_summary.size()) + " exact oracles";
}

void run_ystar_profile(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GEvaluator ev = make_evaluator(cfg, ctx.seed, "quadrature");
  const auto radii = cfg.reals("radii", {0.0, 0.5, 1.0, 2.0, 3.0});
  const double t = cfg.real("t", 0.0);
  std::vector<RdeSolution> rows(radii.size());
  parallel_for(radii.size(), ctx.workers, [&](std::size_t i) {
    rows[i] = solve_y_star(ev, radii[i] * radii[i], t, SolveOptions{0.0, false});
  });
  CsvWriter out(ctx.file("ystar_profile.csv"), {"abs_z", "r", "t", "y_star", "residual"});
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row({radii[i], rows[i].r, t, rows[i].y_star, rows[i].residual});
    if (i > 0 && radii[i] > radii[i - 1] && !(rows[i].y_star < rows[i - 1].y_star)) monotone = false;
  }
  ctx.check({"decreasing_in_r", monotone, 0.0, 0.0, ""});
  std::ostringstream summary;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (radii[i] == 0.0 && t == 0.0) {
      const double target = y_star_origin(ev.beta());
      const double gap = relative_gap(rows[i].y_star, target);
      ctx.check({"origin_closed_form", gap < 0.02, gap, 0.02,
                 "y_* = " + fixed(rows[i].y_star, 6) + ", closed form " + fixed(target, 6)});
      summary << "y_*(0) = " << fixed(rows[i].y_star, 6) << " (closed form " << fixed(target, 6) << ")";
      break;
    }
  }
  ctx.result->summary = summary.str();
}

void run_density_profile(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GEvaluator ev = make_evaluator(cfg, ctx.seed, "quadrature");
  const auto radii = cfg.reals("radii", {0.0, 0.5, 1.0, 1.5, 2.0, 3.0});
  const auto rows = density_profile(ev, radii, {}, ctx.workers);
  write_density_profile_csv(rows, ctx.file("density_profile.csv"));
  const bool check_origin = cfg.count("check_origin", 1) != 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (radii[i] != 0.0) continue;
    const double target = density_origin(ev.beta());
    ctx.result->summary = "density(0) = " + fixed(rows[i].density, 6) + " (closed form " + fixed(target, 6) + ")";
    if (check_origin) {
      const double gap = relative_gap(rows[i].density, target);
      ctx.check({"origin_closed_form", gap < 0.02, gap, 0.02, ""});
    }
    break;
  }
  std::size_t warnings = 0;
  for (const auto& r : rows) warnings += r.derivative_warning ? 1 : 0;
  ctx.check({"derivative_cross_check", warnings == 0, static_cast<double>(warnings), 0.0,
             "radii where the two slopes differ by more than 3%"});
}

void run_esd_compare(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const std::size_t n = cfg.n > 0 ? cfg.n : 1000;
  const HeavyTailLaw law = make_law(cfg);
  const double band = cfg.real("band", 0.10);
  const auto edges = equal_area_edges(cfg.real("r_max", 3.0), cfg.count("bins", 12));
  std::vector<std::vector<cplx>> spectra(cfg.seeds);
  parallel_for(cfg.seeds, ctx.workers, [&](std::size_t s) {
    spectra[s] = eigenvalues(build_matrix(law, n, substream_seed(ctx.seed, s)));
  });
  EmpiricalMeasure mu;
  for (const auto& sp : spectra) mu.atoms.insert(mu.atoms.end(), sp.begin(), sp.end());
  const RadialHistogram empirical = radial_histogram(mu, edges);
  const GEvaluator ev = make_evaluator(cfg, substream_seed(ctx.seed, cfg.seeds), "quadrature");
  const RadialHistogram theory = theory_histogram(ev, edges, ctx.workers);
  const EsdDeviation dev = compare_esd(empirical, theory, mu.atoms);

  write_measure_csv(mu, ctx.file("esd_eigenvalues.csv"));
  write_radial_histogram_csv(empirical, ctx.file("esd_histogram.csv"));
  write_radial_histogram_csv(theory, ctx.file("theory_histogram.csv"));
  {
    CsvWriter out(ctx.file("esd_deviation.csv"), {"statistic", "value"});
    out.row({"sup_abs", format_real(dev.sup_abs)});
    out.row({"peak", format_real(dev.peak)});
    out.row({"sup_relative", format_real(dev.sup_relative)});
    out.row({"l1", format_real(dev.l1)});
    out.row({"angular_chi_square", format_real(dev.angular.statistic)});
    out.row({"angular_p_value", format_real(dev.angular.p_value)});
  }
  ctx.check({"sup_deviation", dev.sup_relative < band, dev.sup_relative, band, "relative to the theory peak"});
  ctx.check({"angular_uniformity", dev.angular.p_value >= 0.01, dev.angular.p_value, 0.01,
             std::to_string(dev.sectors) + " sectors"});
  ctx.result->summary = "sup deviation " + fixed(100.0 * dev.sup_relative, 3) + "% of peak, angular p = " +
                        fixed(dev.angular.p_value, 3);
}

void run_stieltjes_compare(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const std::size_t n = cfg.n > 0 ? cfg.n : 500;
  const HeavyTailLaw law = make_law(cfg);
  const cplx z = config_z(cfg, 1.0);
  const double t = cfg.real("t", 1.0);
  const double band = cfg.real("band", 0.05);
  std::vector<cplx> values(cfg.seeds);
  parallel_for(cfg.seeds, ctx.workers, [&](std::size_t s) {
    values[s] = stieltjes_sv(build_matrix(law, n, substream_seed(ctx.seed, s)).entries, z, cplx(0.0, t));
  });
  const cplx mean = pairwise_sum(values) / static_cast<double>(values.size());
  const GEvaluator ev = make_evaluator(cfg, substream_seed(ctx.seed, cfg.seeds), "quadrature");
  const cplx limit = stieltjes_limit(ev, z, t);
  {
    CsvWriter out(ctx.file("stieltjes_samples.csv"), {"seed_index", "re", "im"});
    for (std::size_t s = 0; s < values.size(); ++s) {
      out.row({static_cast<double>(s), values[s].real(), values[s].imag()});
    }
  }
  {
    CsvWriter out(ctx.file("stieltjes_summary.csv"), {"mean_re", "mean_im", "limit_re", "limit_im", "relative_gap"});
    out.row({mean.real(), mean.imag(), limit.real(), limit.imag(), std::abs(mean - limit) / std::abs(limit)});
  }
  const double gap = std::abs(mean - limit) / std::abs(limit);
  ctx.check({"finite_n_gap", gap < band, gap, band, ""});
  ctx.result->summary = "mean Im m = " + fixed(mean.imag(), 6) + ", limit " + fixed(limit.imag(), 6);
}

void run_rde_population(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  PopulationParams params;
  params.alpha = cfg.alpha;
  params.z = config_z(cfg, 0.0);
  params.t = cfg.real("t", 1.0);
  params.truncation = cfg.count("truncation", 200);
  PopulationRunOptions opts;
  opts.size = cfg.samples > 0 ? cfg.samples : 100000;
  opts.burn_in = static_cast<int>(cfg.count("burn_in", 50));
  opts.measure = static_cast<int>(cfg.count("measure", 50));
  opts.seed = substream_seed(ctx.seed, 0);
  opts.workers = ctx.workers;
  const PopulationReport rep = run_h_population(params, opts);

  const GEvaluator ev = GEvaluator::quadrature(cfg.alpha / 2.0);
  const double y_star = solve_y_star(ev, std::norm(params.z), params.t).y_star;
  const double target = std::pow(y_star, cfg.alpha / 2.0);
  {
    CsvWriter out(ctx.file("population_trace.csv"), {"sweep", "beta_moment", "mean"});
    for (std::size_t i = 0; i < rep.moment_trace.size(); ++i) {
      out.row({static_cast<double>(i + 1), rep.moment_trace[i], rep.mean_trace[i]});
    }
  }
  write_population_histogram_csv(population_histogram(rep.final_state.values, cfg.count("bins", 50)),
                                 ctx.file("population_histogram.csv"));
  const double gap = relative_gap(rep.beta_moment, target);
  ctx.check({"beta_moment_vs_fixed_point", gap < 0.03, gap, 0.03, ""});
  ctx.check({"cauchy_criterion", rep.cauchy_gap < 0.01, rep.cauchy_gap, 0.01, "spread over the measurement sweeps"});
  std::ostringstream summary;
  summary << "E[h^beta] = " << fixed(rep.beta_moment, 6) << ", y_*^beta = " << fixed(target, 6) << ", E[h] = "
          << fixed(rep.mean, 6);

  const std::size_t trees = cfg.count("pwit_seeds", 0);
  if (trees > 0) {
    PwitProbeOptions po;
    po.depth = static_cast<int>(cfg.count("pwit_depth", 6));
    po.branching = cfg.count("pwit_branching", 50);
    po.trees = trees;
    po.tolerance = cfg.real("pwit_tolerance", 0.3);
    po.seed = substream_seed(ctx.seed, 1);
    po.workers = ctx.workers;
    const PwitProbe probe = pwit_probe(cfg.alpha, params.z, params.t, rep.y_estimate, rep.mean, po);
    {
      CsvWriter out(ctx.file("pwit_summary.csv"),
                    {"closed_mean", "closed_se", "raw_mean", "raw_se", "mean_vertices", "capped", "max_solve_gap"});
      out.row({probe.closed.value, probe.closed.std_error, probe.raw.value, probe.raw.std_error, probe.mean_vertices,
               static_cast<double>(probe.capped), probe.max_solve_gap});
    }
    const double pgap = relative_gap(probe.closed.value, rep.mean);
    ctx.check({"pwit_vs_population", pgap < 0.05, pgap, 0.05,
               "E[Im a] = " + fixed(probe.closed.value, 6) + " +- " + fixed(probe.closed.std_error, 3)});
    summary << ", PWIT E[Im a] = " << fixed(probe.closed.value, 6);
  }
  ctx.result->summary = summary.str();
}

void run_tail_report(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GEvaluator ev = make_evaluator(cfg, ctx.seed, "quadrature");
  const auto radii = cfg.reals("radii", {3.0, 4.0, 5.0, 6.0});
  const double band = cfg.real("band", 0.15);
  const TailReport rep = tail_shape_report(ev, radii, ctx.workers);
  {
    CsvWriter out(ctx.file("tail_report.csv"), {"abs_z", "density", "asymptote", "log_ratio", "corrected_asymptote",
                                                "corrected_log_ratio"});
    for (const auto& r : rep.rows) {
      out.row({r.radius, r.density, r.asymptote, r.log_ratio, r.corrected_asymptote, r.corrected_log_ratio});
    }
  }
  ctx.check({"log_ratio_drift", rep.flatness < band, rep.flatness, band,
             "against |z|^{2(alpha-1)} exp(-(alpha/2)|z|^alpha)"});
  ctx.check({"log_ratio_drift_full_exponent", rep.corrected_flatness < band, rep.corrected_flatness, band,
             "against |z|^{2(alpha-1)} exp(-|z|^alpha)"});
  ctx.result->summary = "drift " + fixed(rep.flatness, 4) + " (half exponent), " + fixed(rep.corrected_flatness, 4) +
                        " (full exponent)";
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunResult& r, const RunOverrides& overrides, unsigned workers, const std::string& started,
                    const std::filesystem::path& dir) {
  nlohmann::ordered_json j;
  j["version"] = HEAVYTAIL_VERSION;
  j["kind"] = to_string(r.config.kind);
  j["config"] = serialize_config(r.config);
  j["seed_offset"] = overrides.seed_offset;
  j["workers"] = workers;
  j["started"] = started;
  j["seconds"] = r.seconds;
  j["summary"] = r.summary;
  j["exit_status"] = r.exit_status();
  j["files"] = nlohmann::json::array();
  for (const auto& f : r.files) j["files"].push_back(f.string());
  j["checks"] = nlohmann::json::array();
  for (const auto& c : r.checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}, {"detail", c.detail}});
  }
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides) {
  const auto start = Clock::now();
  const std::string started = utc_now();
  RunResult result;
  result.config = config;
  if (!overrides.output.empty()) result.config.output = overrides.output;
  if (overrides.workers > 0) result.config.workers = overrides.workers;

  Context ctx;
  ctx.cfg = result.config;
  ctx.seed = config.seed + overrides.seed_offset;
  ctx.workers = ctx.cfg.workers > 0 ? ctx.cfg.workers : default_workers();
  ctx.dir = ctx.cfg.output;
  ctx.result = &result;
  std::filesystem::create_directories(ctx.dir);

  switch (config.kind) {
    case ExperimentKind::stable_checks: run_stable_checks(ctx); break;
    case ExperimentKind::identities: run_identities(ctx); break;
    case ExperimentKind::ystar_profile: run_ystar_profile(ctx); break;
    case ExperimentKind::density_profile: run_density_profile(ctx); break;
    case ExperimentKind::esd_compare: run_esd_compare(ctx); break;
    case ExperimentKind::stieltjes_compare: run_stieltjes_compare(ctx); break;
    case ExperimentKind::rde_population: run_rde_population(ctx); break;
    case ExperimentKind::tail_report: run_tail_report(ctx); break;
  }
  if (result.summary.empty()) {
    const auto passed = std::count_if(result.checks.begin(), result.checks.end(), [](auto& c) { return c.passed; });
    result.summary = std::to_string(passed) + "/" + std::to_string(result.checks.size()) + " checks pass";
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  write_manifest(result, overrides, ctx.workers, started, ctx.dir);
  return result;
}

SuiteResult verify_suite(const std::string& suite, unsigned workers) {
  SuiteResult out;
  if (suite == "exact") {
    for (const std::size_t n : {8, 12, 20}) {
      const HeavyTailLaw law(1.5);
      constexpr std::size_t seeds = 50;
      std::vector<IdentityReport> reports(seeds);
      std::vector<std::vector<CheckResult>> oracles(seeds);
      parallel_for(seeds, workers, [&](std::size_t s) {
        const MatrixSample m = build_matrix(law, n, substream_seed(n, s));
        const cplx z(0.3, -0.2);
        reports[s] = identity_suite(m.entries, z);
        oracles[s] = exact_oracle_checks(m.entries, z);
      });
      std::map<std::string, CheckResult> merged;
      std::vector<std::string> order;
      auto merge = [&](const std::string& name, bool pass, double value, double threshold) {
        auto [it, fresh] = merged.try_emplace(name, CheckResult{name + " n=" + std::to_string(n), true, 0.0, threshold, ""});
        if (fresh) order.push_back(name);
        it->second.passed = it->second.passed && pass;
        it->second.value = std::max(it->second.value, value);
      };
      for (std::size_t s = 0; s < seeds; ++s) {
        for (const auto& c : reports[s].checks) merge(c.name, c.status != CheckStatus::fail, c.worst, 0.0);
        for (const auto& c : oracles[s]) merge(c.name, c.passed, c.value, c.threshold);
      }
      for (const auto& name : order) out.checks.push_back(merged[name]);
    }
    return out;
  }
  if (suite == "mc") {
    for (const double beta : {0.25, 0.5, 0.75}) {
      const StableLaw law(beta);
      const double target = 1.0 / (std::tgamma(1.0 - beta) * std::tgamma(1.0 + beta));
      RandomStream rng(substream_seed(17, static_cast<std::uint64_t>(beta * 100)));
      std::vector<double> xs(100000);
      for (double& x : xs) x = std::pow(law.sample(rng), -beta);
      const Estimate e = mean_estimate(xs);
      const double z_score = std::abs(e.value - target) / e.std_error;
      out.checks.push_back({"neg_moment_mc beta=" + fixed(beta, 3), z_score < 4.0, z_score, 4.0, ""});
    }
    {
      const GEvaluator ev = GEvaluator::monte_carlo(0.5, 200000, 23);
      const double y = solve_y_star(ev, 0.0, 0.0).y_star;
      const double gap = relative_gap(y, y_star_origin(0.5));
      out.checks.push_back({"y_star_origin_mc alpha=1", gap < 0.02, gap, 0.02, ""});
    }
    {
      const NonnegativeLaw unit{[](RandomStream&) { return 1.0; }, 1.0};
      const LePageReport rep = lepage_reduce(1.0, 1000, unit, 2000, 29);
      out.checks.push_back({"lepage_unit K=1000", rep.ks_statistic < rep.ks_threshold, rep.ks_statistic,
                            rep.ks_threshold, ""});
    }
    return out;
  }
  throw std::invalid_argument("unknown suite '" + suite + "' (expected exact or mc)");
}

}  // namespace ht
