#pragma once

// Experiment runners. Each returns its output files as (name, contents)
// pairs; replicate r at sample size n always uses the seed
// derive_seed(master, experiment, n, r), so output does not depend on the
// number of worker threads.

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "symlat/csv.hpp"
#include "symlat/experiments/config.hpp"
#include "symlat/experiments/ingest.hpp"
#include "symlat/experiments/scenarios.hpp"
#include "symlat/experiments/svg_plot.hpp"
#include "symlat/invariance_tests.hpp"
#include "symlat/lattice_builders.hpp"
#include "symlat/lattice_io.hpp"
#include "symlat/regression.hpp"
#include "symlat/search.hpp"

namespace symlat::experiments {

/// Runs fn(0..count-1) on `jobs` threads. The first exception is rethrown
/// after all workers stop.
inline void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (!failed) {
        const std::size_t i = next++;
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::uint64_t replicate_seed(std::uint64_t master, const std::string& experiment, std::size_t n, std::size_t r) {
  return derive_seed(master, experiment, n, r);
}

enum class OutputFormat { Csv, Svg, Both };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "svg") return OutputFormat::Svg;
  if (s == "both") return OutputFormat::Both;
  throw ConfigError(0, "format must be csv, svg or both, got '" + s + "'");
}

/// Files produced by a run, in a fixed order.
struct RunOutput {
  std::vector<std::pair<std::string, std::string>> files;
  std::string summary;

  const std::string& file(const std::string& name) const {
    for (const auto& [n, c] : files)
      if (n == name) return c;
    throw ArgumentError("no output file '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& [n, c] : files)
      if (n == name) return true;
    return false;
  }
};

struct RunOptions {
  std::size_t jobs = 1;
  OutputFormat format = OutputFormat::Both;
};

// ---------------------------------------------------------------------------
// Builders from settings
// ---------------------------------------------------------------------------

inline TestConfig build_test_config(const TestSettings& s, const std::string& type) {
  if (type == "asym") {
    AsymTestConfig c;
    c.bound = HolderBound{s.lipschitz, s.exponent};
    c.noise = GaussianNoise{s.sigma};
    c.thresholds = s.thresholds;
    c.m = s.m;
    c.alpha = s.alpha;
    validate(c);
    return c;
  }
  if (type == "perm") {
    PermTestConfig c;
    c.bound = OrderBound{s.exponent};
    c.q = s.q;
    c.m = s.m;
    c.B = s.B;
    c.alpha = s.alpha;
    validate(c);
    return c;
  }
  throw ConfigError(0, "unknown test type '" + type + "'");
}

inline Lattice build_lattice(const LatticeSettings& s) {
  if (s.builder == "d4") return d4_lattice(s.dim);
  if (s.builder == "cyclic-chain") return cyclic_chain_lattice(s.orders, s.dim, s.speed);
  if (s.builder == "klein") return klein_lattice();
  if (s.builder == "so3-icosahedral") return so3_axes_lattice(icosahedral_axes());
  if (s.builder == "so3-fifteen") return so3_axes_lattice(fifteen_axes());
  if (s.builder == "sl3-extended") return sl3_extended_lattice();
  if (s.builder == "file") {
    std::ifstream in(s.file);
    if (!in) throw ConfigError(0, "cannot open lattice file '" + s.file + "'");
    return io::read_lattice(in);
  }
  throw ConfigError(0, "unknown lattice builder '" + s.builder + "'");
}

inline SearchConfig build_search_config(const SearchSettings& s, double alpha, std::uint64_t seed) {
  SearchConfig c;
  c.algorithm = s.algorithm == "greedy" ? SearchAlgorithm::BreadthGreedy
                : s.algorithm == "depth" ? SearchAlgorithm::Depth
                                         : SearchAlgorithm::Breadth;
  c.tie_rule = s.tie == "random" ? TieRule::UniformRandom : TieRule::MeetOfMaxima;
  c.alpha = alpha;
  c.seed = seed;
  c.batch = s.batch;
  return c;
}

namespace detail {
inline void add_outputs(RunOutput& out, const RunOptions& opt, const std::string& csv_name, const std::string& csv,
                        const std::vector<std::pair<std::string, std::string>>& svgs) {
  if (opt.format != OutputFormat::Svg) out.files.emplace_back(csv_name, csv);
  if (opt.format != OutputFormat::Csv)
    for (const auto& s : svgs) out.files.push_back(s);
}

inline std::string rate(std::size_t hits, std::size_t total) {
  return format_number(static_cast<double>(hits) / static_cast<double>(total));
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Power curve
// ---------------------------------------------------------------------------

/// Rejection rates of each test against the non-invariant rotation action
/// (power) and the invariant doubled action (size) on scenario exp-abs.
inline RunOutput run_power_curve(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  const Scenario scenario = finite_scenario(cfg.dim, cfg.test.sigma);
  const GroupAction rotate = cyclic_rotation_action(4, cfg.dim, 1);
  const GroupAction doubled = with_representation(rotate, cyclic_rotation_action(4, cfg.dim, 2).representation);
  const SamplerSpec sampler = default_sampler(rotate.group);
  const std::vector<std::pair<std::string, const GroupAction*>> hypotheses{{"non-invariant", &rotate},
                                                                           {"invariant", &doubled}};
  std::vector<TestConfig> tests;
  for (const auto& t : cfg.test.types) tests.push_back(build_test_config(cfg.test, t));

  const std::size_t units = cfg.sizes.size() * cfg.replicates;
  const std::size_t per_unit = tests.size() * hypotheses.size();
  std::vector<char> rejected(units * per_unit, 0);
  parallel_for(units, opt.jobs, [&](std::size_t u) {
    const std::size_t n = cfg.sizes[u / cfg.replicates], r = u % cfg.replicates;
    const std::uint64_t seed = replicate_seed(cfg.seed, "power-curve", n, r);
    Rng rng = make_rng(derive_seed(seed, "data"));
    const RegressionDataset data = generate(scenario, n, rng);
    const NeighborIndex index(data);
    for (std::size_t t = 0; t < tests.size(); ++t)
      for (std::size_t h = 0; h < hypotheses.size(); ++h) {
        const auto o = run_test(data, index, *hypotheses[h].second, sampler, tests[t],
                                derive_seed(seed, cfg.test.types[t], hypotheses[h].first));
        rejected[u * per_unit + t * hypotheses.size() + h] = o.rejected();
      }
  });

  std::ostringstream csv;
  csv << "test,hypothesis,n,rejection_rate,replicates,alpha\n";
  for (std::size_t t = 0; t < tests.size(); ++t)
    for (std::size_t h = 0; h < hypotheses.size(); ++h)
      for (std::size_t k = 0; k < cfg.sizes.size(); ++k) {
        std::size_t hits = 0;
        for (std::size_t r = 0; r < cfg.replicates; ++r)
          hits += rejected[(k * cfg.replicates + r) * per_unit + t * hypotheses.size() + h];
        csv << cfg.test.types[t] << ',' << hypotheses[h].first << ',' << cfg.sizes[k] << ','
            << detail::rate(hits, cfg.replicates) << ',' << cfg.replicates << ',' << format_number(cfg.test.alpha)
            << '\n';
      }
  RunOutput out;
  const std::string text = csv.str();
  detail::add_outputs(out, opt, "power_curve.csv", text, {{"power_curve.svg", power_curve_svg(read_csv_table(text))}});
  return out;
}

// ---------------------------------------------------------------------------
// Group recovery
// ---------------------------------------------------------------------------

/// Proportion of replicates whose estimate is each lattice node, per test
/// type and n, on scenario exp-abs with the configured cyclic lattice.
inline RunOutput run_group_recovery(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  const Scenario scenario = finite_scenario(cfg.dim, cfg.test.sigma);
  LatticeSettings ls = cfg.lattice;
  ls.dim = cfg.dim;
  const Lattice lat = build_lattice(ls);
  std::vector<TestConfig> tests;
  for (const auto& t : cfg.test.types) tests.push_back(build_test_config(cfg.test, t));

  const std::size_t units = cfg.sizes.size() * cfg.replicates;
  std::vector<NodeId> estimates(units * tests.size());
  parallel_for(units, opt.jobs, [&](std::size_t u) {
    const std::size_t n = cfg.sizes[u / cfg.replicates], r = u % cfg.replicates;
    const std::uint64_t seed = replicate_seed(cfg.seed, "group-recovery", n, r);
    Rng rng = make_rng(derive_seed(seed, "data"));
    const RegressionDataset data = generate(scenario, n, rng);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      const auto sc = build_search_config(cfg.search, cfg.test.alpha, derive_seed(seed, cfg.test.types[t]));
      estimates[u * tests.size() + t] = run_search(lat, data_tester(data, lat, tests[t]), sc).estimate;
    }
  });

  std::ostringstream csv;
  csv << "test,n";
  for (const auto& node : lat.nodes()) csv << ',' << csv_field("prop_" + node.label);
  csv << ",replicates\n";
  for (std::size_t t = 0; t < tests.size(); ++t)
    for (std::size_t k = 0; k < cfg.sizes.size(); ++k) {
      std::map<NodeId, std::size_t> counts;
      for (std::size_t r = 0; r < cfg.replicates; ++r) counts[estimates[(k * cfg.replicates + r) * tests.size() + t]]++;
      csv << cfg.test.types[t] << ',' << cfg.sizes[k];
      for (const auto& node : lat.nodes()) csv << ',' << detail::rate(counts[node.id], cfg.replicates);
      csv << ',' << cfg.replicates << '\n';
    }
  RunOutput out;
  const std::string text = csv.str();
  std::vector<std::pair<std::string, std::string>> svgs;
  const bool chain_124 = lat.size() == 3 && lat.node(1).label == "C2" && lat.node(2).label == "C4";
  if (chain_124) {
    const auto table = read_csv_table(text);
    for (const auto& t : cfg.test.types) svgs.emplace_back("group_recovery_" + t + ".svg", group_recovery_svg(table, t));
  }
  detail::add_outputs(out, opt, "group_recovery.csv", text, svgs);
  return out;
}

// ---------------------------------------------------------------------------
// Estimator comparison
// ---------------------------------------------------------------------------

struct EstimatorRow {
  double mspe_a = 0, mspe_b = 0, mspe_c = 0;
  NodeId ghat_b = 0, ghat_c = 0;
};

/// MSPE of the plain LCE (A), the full-data symmetrized estimator (B) and
/// the split-data one (C) on an independent test set of the same size.
inline EstimatorRow estimator_replicate(const Scenario& scenario, const Lattice& lat, const TestConfig& test,
                                        const SearchSettings& search, double alpha, std::size_t n,
                                        std::uint64_t seed) {
  Rng rng = make_rng(derive_seed(seed, "data"));
  const RegressionDataset train = generate(scenario, n, rng, false);
  const RegressionDataset test_set = generate(scenario, n, rng, true);
  const auto sc = build_search_config(search, alpha, derive_seed(seed, "search"));
  EstimatorRow row;
  row.mspe_a = mspe(plain_estimator(train), test_set);
  auto b = symmetrized_estimator(train, lat, test, sc, SymmetrizedVariant::FullData);
  row.mspe_b = mspe(b.regressor, test_set);
  row.ghat_b = b.search.estimate;
  auto c = symmetrized_estimator(train, lat, test, sc, SymmetrizedVariant::SplitData);
  row.mspe_c = mspe(c.regressor, test_set);
  row.ghat_c = c.search.estimate;
  return row;
}

inline RunOutput run_estimator_comparison(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  if (cfg.scenario == "exp-abs") throw ConfigError(0, "estimator comparison needs scenario extrapolation-1 .. extrapolation-4");
  const Scenario scenario = scenario_by_id(cfg.scenario);
  const Lattice lat = build_lattice(cfg.lattice);
  if (lat.ambient().dim != scenario.dim())
    throw ConfigError(0, "lattice acts on R^" + std::to_string(lat.ambient().dim) + " but the scenario is in R^" +
                             std::to_string(scenario.dim()));
  const TestConfig test = build_test_config(cfg.test, cfg.test.types.front());
  const std::size_t units = cfg.sizes.size() * cfg.replicates;
  std::vector<EstimatorRow> rows(units);
  parallel_for(units, opt.jobs, [&](std::size_t u) {
    const std::size_t n = cfg.sizes[u / cfg.replicates], r = u % cfg.replicates;
    rows[u] = estimator_replicate(scenario, lat, test, cfg.search, cfg.test.alpha, n,
                                  replicate_seed(cfg.seed, "estimator-comparison", n, r));
  });

  std::ostringstream csv, means;
  csv << "scenario,n,replicate,mspe_A,mspe_B,mspe_C,ghat_B,ghat_C\n";
  means << "scenario,n,mean_mspe_A,mean_mspe_B,mean_mspe_C,replicates\n";
  for (std::size_t k = 0; k < cfg.sizes.size(); ++k) {
    double sa = 0, sb = 0, scc = 0;
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      const auto& row = rows[k * cfg.replicates + r];
      csv << cfg.scenario << ',' << cfg.sizes[k] << ',' << r << ',' << format_number(row.mspe_a) << ','
          << format_number(row.mspe_b) << ',' << format_number(row.mspe_c) << ',' << csv_field(lat.node(row.ghat_b).label)
          << ',' << csv_field(lat.node(row.ghat_c).label) << '\n';
      sa += row.mspe_a;
      sb += row.mspe_b;
      scc += row.mspe_c;
    }
    const double R = static_cast<double>(cfg.replicates);
    means << cfg.scenario << ',' << cfg.sizes[k] << ',' << format_number(sa / R) << ',' << format_number(sb / R) << ','
          << format_number(scc / R) << ',' << cfg.replicates << '\n';
  }
  RunOutput out;
  const std::string text = csv.str();
  detail::add_outputs(out, opt, "estimator_comparison.csv", text,
                      {{"estimator_comparison.svg", estimator_svg(read_csv_table(text))}});
  if (opt.format != OutputFormat::Svg) out.files.emplace_back("estimator_means.csv", means.str());
  return out;
}

// ---------------------------------------------------------------------------
// Single search
// ---------------------------------------------------------------------------

/// Layered drawing of the lattice, bottom to top, nodes filled by status.
inline std::string hasse_svg(const Lattice& lat, const SearchResult& r) {
  const auto& levels = lat.levels();
  std::size_t widest = 1;
  for (const auto& l : levels) widest = std::max(widest, l.size());
  const double W = std::max(320.0, 130.0 * static_cast<double>(widest)), row = 90, H = row * static_cast<double>(levels.size()) + 40;
  std::map<NodeId, std::pair<double, double>> at;
  for (std::size_t h = 0; h < levels.size(); ++h)
    for (std::size_t k = 0; k < levels[h].size(); ++k)
      at[levels[h][k]] = {W * (static_cast<double>(k) + 0.5) / static_cast<double>(levels[h].size()),
                          H - 40 - row * static_cast<double>(h)};
  using detail::fixed2;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed2(W) << "\" height=\"" << fixed2(H) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (auto [lo, hi] : lat.covers())
    o << "<line x1=\"" << fixed2(at[lo].first) << "\" y1=\"" << fixed2(at[lo].second) << "\" x2=\"" << fixed2(at[hi].first)
      << "\" y2=\"" << fixed2(at[hi].second) << "\" stroke=\"black\"/>\n";
  for (const auto& [id, rec] : r.nodes) {
    const auto [x, y] = at[id];
    o << "<rect x=\"" << fixed2(x - 55) << "\" y=\"" << fixed2(y - 14) << "\" width=\"110\" height=\"28\" fill=\""
      << status_color(rec.status) << "\" stroke=\"black\" stroke-width=\"" << (id == r.estimate ? 3 : 1) << "\"/>\n";
    o << "<text x=\"" << fixed2(x) << "\" y=\"" << fixed2(y + 4) << "\" text-anchor=\"middle\" font-size=\"12\">"
      << detail::escape_xml(rec.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

struct SingleSearchResult {
  SearchResult search;
  RunOutput output;
};

/// Node ids for the given labels; unknown labels are a config error.
inline std::set<NodeId> ids_for_labels(const Lattice& lat, const std::vector<std::string>& labels) {
  std::set<NodeId> out;
  for (const auto& l : labels) {
    auto id = lat.find_label(l);
    if (!id) throw ConfigError(0, "lattice has no node labelled '" + l + "'");
    out.insert(*id);
  }
  return out;
}

inline RegressionDataset search_data(const ExperimentConfig& cfg) {
  if (cfg.data.source == "csv") return read_csv_dataset(cfg.data.path);
  if (cfg.data.source == "idx") return read_idx_dataset(cfg.data.path, cfg.data.labels);
  const Scenario s = scenario_by_id(cfg.scenario, cfg.dim, cfg.test.sigma);
  Rng rng = make_rng(derive_seed(cfg.seed, "single-search", "data"));
  return generate(s, cfg.data.n, rng);
}

inline SingleSearchResult run_single_search(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  const Lattice lat = build_lattice(cfg.lattice);
  const auto sc = build_search_config(cfg.search, cfg.test.alpha, derive_seed(cfg.seed, "single-search", "search"));
  SearchResult result;
  if (cfg.data.source == "oracle") {
    if (!cfg.data.gmax.empty()) {
      auto g = lat.find_label(cfg.data.gmax);
      if (!g) throw ConfigError(0, "lattice has no node labelled '" + cfg.data.gmax + "'");
      result = run_search(lat, oracle_tester(lat, *g), sc);
    } else {
      result = run_search(lat, scripted_tester(ids_for_labels(lat, cfg.data.rejects)), sc);
    }
  } else {
    const RegressionDataset data = search_data(cfg);
    if (data.dim() != lat.ambient().dim)
      throw DimensionMismatch("dataset has dimension " + std::to_string(data.dim()) + " but the lattice acts on R^" +
                              std::to_string(lat.ambient().dim));
    result = run_search(lat, data_tester(data, lat, build_test_config(cfg.test, cfg.test.types.front())), sc);
  }

  SingleSearchResult out{result, {}};
  std::ostringstream csv, dot, summary;
  write_search_csv(csv, result);
  write_hasse_annotation(dot, lat, result);
  summary << "estimate: " << lat.node(result.estimate).label << "\ntilde:";
  for (NodeId t : result.tilde) summary << ' ' << lat.node(t).label;
  summary << "\nmeet of tilde: ";
  if (!result.tilde.empty()) {
    NodeId m = result.tilde.front();
    for (NodeId t : result.tilde) m = lat.meet(m, t);
    summary << lat.node(m).label;
  }
  summary << "\ntests performed: " << result.tests_performed << '\n';
  out.output.summary = summary.str();
  detail::add_outputs(out.output, opt, "search.csv", csv.str(), {{"hasse.svg", hasse_svg(lat, result)}});
  out.output.files.emplace_back("hasse.dot", dot.str());
  out.output.files.emplace_back("summary.txt", out.output.summary);
  return out;
}

inline RunOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  switch (cfg.kind) {
    case ExperimentKind::PowerCurve: return run_power_curve(cfg, opt);
    case ExperimentKind::GroupRecovery: return run_group_recovery(cfg, opt);
    case ExperimentKind::EstimatorComparison: return run_estimator_comparison(cfg, opt);
    case ExperimentKind::SingleSearch: return run_single_search(cfg, opt).output;
  }
  return {};
}

}  // namespace symlat::experiments
