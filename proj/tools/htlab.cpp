#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "heavytail/config.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/experiments.hpp"
#include "heavytail/parallel.hpp"

namespace {

void print_checks(const std::vector<ht::CheckResult>& checks) {
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(34) << c.name << " value=" << c.value;
    if (c.threshold != 0.0) std::cout << " threshold=" << c.threshold;
    if (!c.detail.empty()) std::cout << "  " << c.detail;
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed non-Hermitian random matrices: simulation against the limiting theory"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned workers = 0;
  std::uint64_t seed_offset = 0;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--workers", workers, "Worker threads (default: HTLAB_WORKERS or all cores)");
  run->add_option("--seed-offset", seed_offset, "Added to the config seed");
  run->add_option("--out", out_dir, "Output directory (overrides the config)");

  auto* list = app.add_subcommand("list-experiments", "List experiment kinds and their section keys");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a built-in verification suite");
  verify->add_option("--suite", suite, "exact or mc")->required()->check(CLI::IsMember({"exact", "mc"}));
  verify->add_option("--workers", workers, "Worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto kind : ht::all_experiment_kinds()) {
        std::cout << ht::to_string(kind) << ":";
        for (const auto& key : ht::section_keys(kind)) std::cout << " " << key;
        std::cout << "\n";
      }
      return 0;
    }
    if (*verify) {
      const auto result = ht::verify_suite(suite, workers > 0 ? workers : ht::default_workers());
      print_checks(result.checks);
      return result.exit_status();
    }
    const ht::ExperimentConfig config = ht::load_config(config_path);
    ht::RunOverrides overrides;
    overrides.workers = workers;
    overrides.seed_offset = seed_offset;
    overrides.output = out_dir;
    const auto result = ht::run_experiment(config, overrides);
    print_checks(result.checks);
    std::cout << result.summary << "\n"
              << "wrote " << result.files.size() + 1 << " files to " << result.config.output.string() << " in "
              << std::setprecision(3) << result.seconds << " s\n";
    return result.exit_status();
  } catch (const ht::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return 2;
  } catch (const ht::ResourceLimit& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
