#pragma once

// Experiment configuration: a flat key = value text format with [section]
// headers. Every error names the offending line.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "symlat/error.hpp"

namespace symlat::experiments {

struct ConfigEntry {
  std::string value;
  std::size_t line = 0;
};

/// Parsed key = value pairs, keyed "section.key".
class ConfigDocument {
 public:
  static ConfigDocument parse(const std::string& text) {
    ConfigDocument doc;
    std::istringstream in(text);
    std::string raw, section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty() || !is_name(section)) throw ConfigError(line_no, "invalid section name '" + section + "'");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || !is_name(key)) throw ConfigError(line_no, "invalid key '" + key + "'");
      if (section.empty()) throw ConfigError(line_no, "key '" + key + "' appears before any [section]");
      const std::string full = section + "." + key;
      if (doc.entries_.count(full)) throw ConfigError(line_no, "duplicate key '" + full + "'");
      doc.entries_[full] = ConfigEntry{value, line_no};
    }
    return doc;
  }

  static ConfigDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open '" + path + "'");
    std::stringstream s;
    s << in.rdbuf();
    return parse(s.str());
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const ConfigEntry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, ConfigEntry>& entries() const noexcept { return entries_; }

  /// Rejects keys outside `known`.
  void check_known(const std::set<std::string>& known) const {
    for (const auto& [k, e] : entries_)
      if (!known.count(k)) throw ConfigError(e.line, "unknown key '" + k + "'");
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto* e = find(key);
    return e ? e->value : fallback;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto* e = find(key);
    return e ? to_double(*e) : fallback;
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto* e = find(key);
    return e ? to_uint(*e, e->value) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
    if (e->value == "false" || e->value == "no" || e->value == "0") return false;
    throw ConfigError(e->line, "expected true or false for '" + key + "', got '" + e->value + "'");
  }

  std::vector<std::string> get_list(const std::string& key) const {
    const auto* e = find(key);
    if (!e) return {};
    std::vector<std::string> out;
    std::string item;
    std::istringstream s(e->value);
    while (std::getline(s, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ConfigError(e->line, "empty list item in '" + key + "'");
      out.push_back(item);
    }
    return out;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(key)) out.push_back(to_double(ConfigEntry{item, find(key)->line}));
    return out;
  }

  std::vector<std::uint64_t> get_uint_list(const std::string& key) const {
    std::vector<std::uint64_t> out;
    for (const auto& item : get_list(key)) out.push_back(to_uint(*find(key), item));
    return out;
  }

  std::size_t line_of(const std::string& key) const {
    const auto* e = find(key);
    return e ? e->line : 0;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto p = s.find('#');
    return p == std::string::npos ? s : s.substr(0, p);
  }

  static bool is_name(const std::string& s) {
    for (char c : s)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
  }

  static double to_double(const ConfigEntry& e) {
    double v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end) throw ConfigError(e.line, "expected a number, got '" + e.value + "'");
    return v;
  }

  static std::uint64_t to_uint(const ConfigEntry& e, const std::string& text) {
    std::uint64_t v = 0;
    const char* b = text.data();
    const char* end = b + text.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end)
      throw ConfigError(e.line, "expected a non-negative integer, got '" + text + "'");
    return v;
  }

  std::map<std::string, ConfigEntry> entries_;
};

enum class ExperimentKind { PowerCurve, GroupRecovery, EstimatorComparison, SingleSearch };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::PowerCurve: return "power-curve";
    case ExperimentKind::GroupRecovery: return "group-recovery";
    case ExperimentKind::EstimatorComparison: return "estimator-comparison";
    case ExperimentKind::SingleSearch: return "single-search";
  }
  return "?";
}

struct TestSettings {
  std::vector<std::string> types{"asym", "perm"};  // asym, perm
  double alpha = 0.05;
  std::size_t m = 0;  // 0 means m = n
  std::vector<double> thresholds;  // empty means the default grid
  double sigma = 0.05;
  double lipschitz = 1.0;
  double exponent = 1.0;
  double q = 0.95;
  std::size_t B = 100;
};

struct LatticeSettings {
  std::string builder = "cyclic-chain";  // d4, cyclic-chain, klein, so3-icosahedral, so3-fifteen, sl3-extended, file
  std::vector<std::size_t> orders{1, 2, 4};
  std::size_t dim = 2;
  std::size_t speed = 1;
  std::string file;
};

struct SearchSettings {
  std::string algorithm = "breadth";  // breadth, greedy, depth
  std::string tie = "meet";           // meet, random
  bool batch = false;
};

struct DataSettings {
  std::string source = "scenario";  // scenario, oracle, csv, idx
  std::string path;
  std::string labels;
  std::size_t n = 200;
  std::vector<std::string> rejects;  // oracle: node labels the oracle rejects
  std::string gmax;                  // oracle: accept exactly the nodes below this label
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::PowerCurve;
  std::string scenario = "exp-abs";  // exp-abs, extrapolation-1 .. extrapolation-4
  std::size_t dim = 2;           // feature dimension of scenario exp-abs
  std::vector<std::size_t> sizes{20, 30, 40, 50, 60, 70, 80, 90, 100, 120, 150, 200, 250, 300};
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
  TestSettings test;
  LatticeSettings lattice;
  SearchSettings search;
  DataSettings data;
  std::string out_dir = "out";
};

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "experiment.kind",    "experiment.scenario", "experiment.dim",      "experiment.sizes",
      "experiment.replicates", "experiment.seed",  "test.types",          "test.alpha",
      "test.m",             "test.thresholds",     "test.sigma",          "test.lipschitz",
      "test.exponent",      "test.q",              "test.B",              "lattice.builder",
      "lattice.orders",     "lattice.dim",         "lattice.speed",       "lattice.file",
      "search.algorithm",   "search.tie",          "search.batch",        "data.source",
      "data.path",          "data.labels",         "data.n",              "data.rejects",
      "data.gmax",          "output.dir"};
  return keys;
}

namespace detail {
inline void require_one_of(const ConfigDocument& doc, const std::string& key, const std::string& value,
                           const std::set<std::string>& allowed) {
  if (allowed.count(value)) return;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  throw ConfigError(doc.line_of(key), "'" + key + "' must be one of {" + list + "}, got '" + value + "'");
}
}  // namespace detail

inline ExperimentConfig parse_experiment(const ConfigDocument& doc) {
  doc.check_known(known_config_keys());
  ExperimentConfig c;
  const std::string kind = doc.get_string("experiment.kind", "");
  if (kind.empty()) throw ConfigError(0, "missing required key 'experiment.kind'");
  if (kind == "power-curve") c.kind = ExperimentKind::PowerCurve;
  else if (kind == "group-recovery") c.kind = ExperimentKind::GroupRecovery;
  else if (kind == "estimator-comparison" || kind == "estimator-compare") c.kind = ExperimentKind::EstimatorComparison;
  else if (kind == "single-search" || kind == "search") c.kind = ExperimentKind::SingleSearch;
  else throw ConfigError(doc.line_of("experiment.kind"), "unknown experiment kind '" + kind + "'");

  if (c.kind == ExperimentKind::EstimatorComparison) {
    c.scenario = "extrapolation-1";
    c.sizes = {50, 100, 200};
    c.test.types = {"asym"};
    c.test.sigma = 0.01;
    c.test.thresholds = {0.1};
    c.lattice.builder = "sl3-extended";
    c.lattice.dim = 3;
  }
  if (c.kind == ExperimentKind::GroupRecovery || c.kind == ExperimentKind::PowerCurve) {
    c.test.lipschitz = 1.0 / 2.718281828459045;
    c.test.thresholds = {0.1};
  }
  c.scenario = doc.get_string("experiment.scenario", c.scenario);
  detail::require_one_of(doc, "experiment.scenario", c.scenario, {"exp-abs", "extrapolation-1", "extrapolation-2", "extrapolation-3", "extrapolation-4"});
  c.dim = doc.get_uint("experiment.dim", c.dim);
  if (c.dim < 2) throw ConfigError(doc.line_of("experiment.dim"), "experiment.dim must be at least 2");
  if (doc.has("experiment.sizes")) {
    c.sizes.clear();
    for (auto v : doc.get_uint_list("experiment.sizes")) c.sizes.push_back(v);
  }
  if (c.sizes.empty()) throw ConfigError(doc.line_of("experiment.sizes"), "experiment.sizes must not be empty");
  for (std::size_t k = 0; k < c.sizes.size(); ++k) {
    if (c.sizes[k] < 2) throw ConfigError(doc.line_of("experiment.sizes"), "sample sizes must be at least 2");
    if (k && c.sizes[k] <= c.sizes[k - 1])
      throw ConfigError(doc.line_of("experiment.sizes"), "sample sizes must be strictly ascending");
  }
  c.replicates = doc.get_uint("experiment.replicates", c.replicates);
  if (c.replicates < 1) throw ConfigError(doc.line_of("experiment.replicates"), "replicates must be at least 1");
  c.seed = doc.get_uint("experiment.seed", c.seed);

  if (doc.has("test.types")) c.test.types = doc.get_list("test.types");
  for (const auto& t : c.test.types) detail::require_one_of(doc, "test.types", t, {"asym", "perm"});
  c.test.alpha = doc.get_double("test.alpha", c.test.alpha);
  if (!(c.test.alpha > 0.0 && c.test.alpha < 1.0)) throw ConfigError(doc.line_of("test.alpha"), "test.alpha must lie in (0, 1)");
  c.test.m = doc.get_uint("test.m", c.test.m);
  if (doc.has("test.thresholds")) {
    if (doc.get_string("test.thresholds", "") == "auto") c.test.thresholds.clear();
    else c.test.thresholds = doc.get_double_list("test.thresholds");
  }
  for (double t : c.test.thresholds)
    if (!(t > 0.0)) throw ConfigError(doc.line_of("test.thresholds"), "thresholds must be positive");
  c.test.sigma = doc.get_double("test.sigma", c.test.sigma);
  if (!(c.test.sigma >= 0.0)) throw ConfigError(doc.line_of("test.sigma"), "test.sigma must be non-negative");
  c.test.lipschitz = doc.get_double("test.lipschitz", c.test.lipschitz);
  if (!(c.test.lipschitz > 0.0)) throw ConfigError(doc.line_of("test.lipschitz"), "test.lipschitz must be positive");
  c.test.exponent = doc.get_double("test.exponent", c.test.exponent);
  if (!(c.test.exponent > 0.0 && c.test.exponent <= 1.0))
    throw ConfigError(doc.line_of("test.exponent"), "test.exponent must lie in (0, 1]");
  c.test.q = doc.get_double("test.q", c.test.q);
  if (!(c.test.q > 0.0 && c.test.q <= 1.0)) throw ConfigError(doc.line_of("test.q"), "test.q must lie in (0, 1]");
  c.test.B = doc.get_uint("test.B", c.test.B);
  if (c.test.B < 1) throw ConfigError(doc.line_of("test.B"), "test.B must be at least 1");

  c.lattice.builder = doc.get_string("lattice.builder", c.lattice.builder);
  detail::require_one_of(doc, "lattice.builder", c.lattice.builder,
                         {"d4", "cyclic-chain", "klein", "so3-icosahedral", "so3-fifteen", "sl3-extended", "file"});
  if (doc.has("lattice.orders")) {
    c.lattice.orders.clear();
    for (auto v : doc.get_uint_list("lattice.orders")) c.lattice.orders.push_back(v);
  }
  c.lattice.dim = doc.get_uint("lattice.dim", c.kind == ExperimentKind::SingleSearch ? c.lattice.dim : c.dim);
  c.lattice.speed = doc.get_uint("lattice.speed", c.lattice.speed);
  c.lattice.file = doc.get_string("lattice.file", "");
  if (c.lattice.builder == "file" && c.lattice.file.empty())
    throw ConfigError(doc.line_of("lattice.builder"), "lattice.builder = file needs lattice.file");

  c.search.algorithm = doc.get_string("search.algorithm", c.search.algorithm);
  detail::require_one_of(doc, "search.algorithm", c.search.algorithm, {"breadth", "greedy", "depth"});
  c.search.tie = doc.get_string("search.tie", c.search.tie);
  detail::require_one_of(doc, "search.tie", c.search.tie, {"meet", "random"});
  c.search.batch = doc.get_bool("search.batch", c.search.batch);

  c.data.source = doc.get_string("data.source", c.data.source);
  detail::require_one_of(doc, "data.source", c.data.source, {"scenario", "oracle", "csv", "idx"});
  c.data.path = doc.get_string("data.path", "");
  c.data.labels = doc.get_string("data.labels", "");
  c.data.n = doc.get_uint("data.n", c.data.n);
  c.data.rejects = doc.get_list("data.rejects");
  c.data.gmax = doc.get_string("data.gmax", "");
  if ((c.data.source == "csv" || c.data.source == "idx") && c.data.path.empty())
    throw ConfigError(doc.line_of("data.source"), "data.source = " + c.data.source + " needs data.path");
  if (c.data.source == "idx" && c.data.labels.empty())
    throw ConfigError(doc.line_of("data.source"), "data.source = idx needs data.labels");
  if (c.data.source == "oracle" && !c.data.gmax.empty() && !c.data.rejects.empty())
    throw ConfigError(doc.line_of("data.gmax"), "give either data.gmax or data.rejects, not both");

  c.out_dir = doc.get_string("output.dir", c.out_dir);
  return c;
}

inline ExperimentConfig parse_experiment(const std::string& text) { return parse_experiment(ConfigDocument::parse(text)); }

inline ExperimentConfig load_experiment(const std::string& path) { return parse_experiment(ConfigDocument::load(path)); }

}  // namespace symlat::experiments
