#include "heavytail/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "heavytail/csv.hpp"
#include "heavytail/errors.hpp"

namespace ht {

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names{
      {ExperimentKind::stable_checks, "stable-checks"},
      {ExperimentKind::identities, "identities"},
      {ExperimentKind::ystar_profile, "ystar-profile"},
      {ExperimentKind::density_profile, "density-profile"},
      {ExperimentKind::esd_compare, "esd-compare"},
      {ExperimentKind::stieltjes_compare, "stieltjes-compare"},
      {ExperimentKind::rde_population, "rde-population"},
      {ExperimentKind::tail_report, "tail-report"},
  };
  return names;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string& v, int line, const std::string& field) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError("line " + std::to_string(line) + ": '" + field + "' expects a number, got '" + v + "'", line,
                      field);
  }
  return x;
}

std::uint64_t parse_unsigned(const std::string& v, int line, const std::string& field) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": '" + field + "' expects a nonnegative integer, got '" + v +
                          "'",
                      line, field);
  }
  return x;
}

std::vector<double> split_reals(const std::string& v, int line, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), line, field));
  return out;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kind_names()) {
    if (kind == k) return name;
  }
  throw std::logic_error("unknown experiment kind");
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view s) {
  for (const auto& [kind, name] : kind_names()) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> v;
    for (const auto& entry : kind_names()) v.push_back(entry.first);
    return v;
  }();
  return kinds;
}

const std::vector<std::string>& section_keys(ExperimentKind k) {
  static const std::map<ExperimentKind, std::vector<std::string>> keys{
      {ExperimentKind::stable_checks, {"series_terms", "lepage_truncation", "lepage_samples"}},
      {ExperimentKind::identities, {"z_re", "z_im", "entries", "phase"}},
      {ExperimentKind::ystar_profile, {"radii", "t", "mode"}},
      {ExperimentKind::density_profile, {"radii", "mode", "check_origin"}},
      {ExperimentKind::esd_compare, {"bins", "r_max", "entries", "phase", "mode", "band"}},
      {ExperimentKind::stieltjes_compare, {"z_re", "z_im", "t", "entries", "phase", "mode", "band"}},
      {ExperimentKind::rde_population,
       {"z_re", "z_im", "t", "truncation", "burn_in", "measure", "bins", "pwit_seeds", "pwit_depth", "pwit_branching",
        "pwit_tolerance"}},
      {ExperimentKind::tail_report, {"radii", "mode", "band"}},
  };
  return keys.at(k);
}

double ExperimentConfig::real(const std::string& key, double fallback) const {
  const auto it = options.find(key);
  return it == options.end() ? fallback : parse_real(it->second, 0, key);
}

std::size_t ExperimentConfig::count(const std::string& key, std::size_t fallback) const {
  const auto it = options.find(key);
  return it == options.end() ? fallback : static_cast<std::size_t>(parse_unsigned(it->second, 0, key));
}

std::string ExperimentConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = options.find(key);
  return it == options.end() ? fallback : it->second;
}

std::vector<double> ExperimentConfig::reals(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = options.find(key);
  return it == options.end() ? fallback : split_reals(it->second, 0, key);
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  bool have_kind = false;
  std::string section;
  int section_line = 0;
  std::vector<std::pair<int, std::pair<std::string, std::string>>> section_entries;
  std::map<std::string, int> seen;

  std::stringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(std::string_view(raw).substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError("line " + std::to_string(line) + ": unterminated section", line, body);
      if (!section.empty()) throw ConfigError("line " + std::to_string(line) + ": only one section allowed", line, body);
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      section_line = line;
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected key = value", line, body);
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key", line, key);
    const std::string scoped = section.empty() ? key : section + "." + key;
    if (seen.count(scoped)) {
      throw ConfigError("line " + std::to_string(line) + ": '" + key + "' repeats line " +
                            std::to_string(seen[scoped]),
                        line, key);
    }
    seen[scoped] = line;
    if (!section.empty()) {
      section_entries.push_back({line, {key, value}});
      continue;
    }
    if (key == "kind") {
      const auto k = parse_experiment_kind(value);
      if (!k) throw ConfigError("line " + std::to_string(line) + ": unknown experiment kind '" + value + "'", line, key);
      cfg.kind = *k;
      have_kind = true;
    } else if (key == "alpha") {
      cfg.alpha = parse_real(value, line, key);
      if (!(cfg.alpha > 0.0 && cfg.alpha < 2.0)) {
        throw ConfigError("line " + std::to_string(line) + ": alpha must lie in (0, 2)", line, key);
      }
    } else if (key == "n") {
      cfg.n = parse_unsigned(value, line, key);
      if (cfg.n < 1) throw ConfigError("line " + std::to_string(line) + ": n must be at least 1", line, key);
    } else if (key == "seed") {
      cfg.seed = parse_unsigned(value, line, key);
    } else if (key == "seeds") {
      cfg.seeds = parse_unsigned(value, line, key);
      if (cfg.seeds < 1) throw ConfigError("line " + std::to_string(line) + ": seeds must be at least 1", line, key);
    } else if (key == "samples") {
      cfg.samples = parse_unsigned(value, line, key);
      if (cfg.samples < 1) throw ConfigError("line " + std::to_string(line) + ": samples must be at least 1", line, key);
    } else if (key == "output") {
      if (value.empty()) throw ConfigError("line " + std::to_string(line) + ": empty output path", line, key);
      cfg.output = value;
    } else if (key == "workers") {
      cfg.workers = static_cast<unsigned>(parse_unsigned(value, line, key));
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'", line, key);
    }
  }
  if (!have_kind) throw ConfigError("missing 'kind'", 0, "kind");
  if (!section.empty() && section != to_string(cfg.kind)) {
    throw ConfigError("line " + std::to_string(section_line) + ": section [" + section + "] does not match kind " +
                          to_string(cfg.kind),
                      section_line, section);
  }
  const auto& allowed = section_keys(cfg.kind);
  for (const auto& [ln, kv] : section_entries) {
    if (std::find(allowed.begin(), allowed.end(), kv.first) == allowed.end()) {
      throw ConfigError("line " + std::to_string(ln) + ": key '" + kv.first + "' is not used by " + to_string(cfg.kind),
                        ln, kv.first);
    }
    if (kv.second.empty()) throw ConfigError("line " + std::to_string(ln) + ": empty value", ln, kv.first);
    cfg.options[kv.first] = kv.second;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string(), 0, "");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "kind = " << to_string(c.kind) << "\n";
  out << "alpha = " << format_real(c.alpha) << "\n";
  if (c.n > 0) out << "n = " << c.n << "\n";
  out << "seed = " << c.seed << "\n";
  out << "seeds = " << c.seeds << "\n";
  if (c.samples > 0) out << "samples = " << c.samples << "\n";
  out << "output = " << c.output.string() << "\n";
  if (c.workers > 0) out << "workers = " << c.workers << "\n";
  if (!c.options.empty()) {
    out << "[" << to_string(c.kind) << "]\n";
    for (const auto& [k, v] : c.options) out << k << " = " << v << "\n";
  }
  return out.str();
}

}  // namespace ht
