#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ht {

enum class ExperimentKind {
  stable_checks,
  identities,
  ystar_profile,
  density_profile,
  esd_compare,
  stieltjes_compare,
  rde_population,
  tail_report,
};

std::string to_string(ExperimentKind k);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view s);
const std::vector<ExperimentKind>& all_experiment_kinds();

// One experiment. Common keys sit at the top of the file; keys specific to the
// kind go in a [kind] section:
//
//   kind = density-profile
//   alpha = 1
//   output = out/density
//   [density-profile]
//   radii = 0, 0.5, 1
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::stable_checks;
  double alpha = 1.5;
  std::size_t n = 0;        // matrix dimension, where used
  std::uint64_t seed = 1;   // base seed; unit i uses substream_seed(seed + offset, i)
  std::size_t seeds = 1;    // independent replicates
  std::size_t samples = 0;  // Monte Carlo sample count, where used
  std::filesystem::path output = "out";
  unsigned workers = 0;     // 0 selects the default
  std::map<std::string, std::string> options;

  bool operator==(const ExperimentConfig&) const = default;

  bool has(const std::string& key) const { return options.count(key) != 0; }
  double real(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;
};

// Keys accepted in the section of each kind.
const std::vector<std::string>& section_keys(ExperimentKind k);

// Throws ConfigError with the 1-based line and the offending field.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace ht
