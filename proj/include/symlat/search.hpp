#pragma once

// Estimating the largest invariance group in a subgroup lattice by testing
// nodes bottom-up: breadth-first with deletion above rejections, its greedy
// variant that skips nodes generated by accepted nodes of the level below,
// and depth-first descent through sub-lattices.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "symlat/csv.hpp"
#include "symlat/error.hpp"
#include "symlat/invariance_tests.hpp"
#include "symlat/lattice.hpp"
#include "symlat/random.hpp"

namespace symlat {

enum class SearchAlgorithm { Breadth, BreadthGreedy, Depth };
enum class TieRule { UniformRandom, MeetOfMaxima };
enum class NodeStatus { Accepted, Rejected, Pruned, SkippedGreedy, Untested };

inline const char* to_string(SearchAlgorithm a) {
  switch (a) {
    case SearchAlgorithm::Breadth: return "breadth";
    case SearchAlgorithm::BreadthGreedy: return "breadth-greedy";
    case SearchAlgorithm::Depth: return "depth";
  }
  return "?";
}

inline const char* to_string(TieRule r) { return r == TieRule::UniformRandom ? "uniform-random" : "meet-of-maxima"; }

inline const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Accepted: return "accepted";
    case NodeStatus::Rejected: return "rejected";
    case NodeStatus::Pruned: return "pruned";
    case NodeStatus::SkippedGreedy: return "skipped-greedy";
    case NodeStatus::Untested: return "untested";
  }
  return "?";
}

/// Significance used at a given level (1-based). Constant by default.
using AlphaSchedule = std::function<double(std::size_t level)>;

/// alpha_1 = alpha, alpha_{i+1} = alpha_i / 2.
inline AlphaSchedule halving_schedule(double alpha) {
  return [alpha](std::size_t level) { return std::ldexp(alpha, -static_cast<int>(level > 0 ? level - 1 : 0)); };
}

struct SearchConfig {
  SearchAlgorithm algorithm = SearchAlgorithm::Breadth;
  double alpha = 0.05;
  TieRule tie_rule = TieRule::MeetOfMaxima;
  std::uint64_t seed = 0;
  bool batch = false;           // one shared sample per level
  AlphaSchedule alpha_schedule;  // empty: constant alpha
};

inline double level_alpha(const SearchConfig& cfg, std::size_t level) {
  return cfg.alpha_schedule ? cfg.alpha_schedule(level) : cfg.alpha;
}

/// Runs the invariance test for one node, or for a whole level at once.
struct NodeTester {
  std::function<TestOutcome(const SubgroupNode&, double alpha, std::uint64_t seed)> test;
  std::function<std::vector<TestOutcome>(const std::vector<const SubgroupNode*>&, double alpha, std::uint64_t seed)>
      test_level;
};

struct NodeRecord {
  NodeId id = 0;
  std::string label;
  NodeStatus status = NodeStatus::Untested;
  std::optional<TestOutcome> outcome;
};

struct SearchResult {
  NodeId estimate = 0;
  std::vector<NodeId> tilde;
  std::map<NodeId, NodeRecord> nodes;
  std::vector<NodeId> test_order;
  std::size_t tests_performed = 0;
  std::size_t computation_units = 0;  // sum of |G| over tested finite nodes

  NodeStatus status(NodeId id) const { return nodes.at(id).status; }
};

/// Brute-force cost: the sum of |G| over every node.
inline std::size_t brute_force_units(const Lattice& lat) {
  std::size_t s = 0;
  for (const auto& n : lat.nodes())
    if (auto o = n.group.order()) s += *o;
  return s;
}

// ---------------------------------------------------------------------------
// Testers
// ---------------------------------------------------------------------------

/// Perfect test: accept exactly the nodes below `gmax`.
inline NodeTester oracle_tester(const Lattice& lat, NodeId gmax) {
  NodeTester t;
  t.test = [&lat, gmax](const SubgroupNode& node, double alpha, std::uint64_t) {
    TestOutcome out;
    out.p_value = lat.leq(node.id, gmax) ? 1.0 : 0.0;
    set_decision(out, alpha);
    return out;
  };
  return t;
}

/// Accepts every node except those listed.
inline NodeTester scripted_tester(std::set<NodeId> rejects) {
  NodeTester t;
  t.test = [rejects = std::move(rejects)](const SubgroupNode& node, double alpha, std::uint64_t) {
    TestOutcome out;
    out.p_value = rejects.count(node.id) ? 0.0 : 1.0;
    set_decision(out, alpha);
    return out;
  };
  return t;
}

/// Tests nodes on data through the lattice's ambient action. Each node
/// samples from `samplers[id]` when given, otherwise default_sampler. In
/// batch mode the shared sampler is the top node's sampler.
inline NodeTester data_tester(const RegressionDataset& data, const Lattice& lat, TestConfig test,
                              std::map<NodeId, SamplerSpec> samplers = {}) {
  auto index = std::make_shared<NeighborIndex>(data);
  auto shared_samplers = std::make_shared<std::map<NodeId, SamplerSpec>>(std::move(samplers));
  auto sampler_for = [shared_samplers](const SubgroupNode& node) {
    auto it = shared_samplers->find(node.id);
    return it != shared_samplers->end() ? it->second : default_sampler(node.group);
  };
  NodeTester t;
  t.test = [&data, &lat, index, test, sampler_for](const SubgroupNode& node, double alpha, std::uint64_t seed) {
    return run_test(data, *index, lat.ambient(), sampler_for(node), with_significance(test, alpha), seed);
  };
  t.test_level = [&data, &lat, index, test, sampler_for](const std::vector<const SubgroupNode*>& nodes, double alpha,
                                                          std::uint64_t seed) {
    std::vector<GroupDescriptor> groups;
    for (const auto* n : nodes) groups.push_back(n->group);
    return batch_test(data, *index, lat.ambient(), groups, sampler_for(lat.node(lat.top())),
                      with_significance(test, alpha), seed);
  };
  return t;
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

namespace detail {

inline SearchResult fresh_result(const Lattice& lat) {
  SearchResult r;
  for (const auto& n : lat.nodes()) r.nodes[n.id] = NodeRecord{n.id, n.label, NodeStatus::Untested, std::nullopt};
  r.nodes[lat.bottom()].status = NodeStatus::Accepted;
  return r;
}

inline TestOutcome run_node(const NodeTester& tester, const SubgroupNode& node, double alpha, std::uint64_t seed) {
  try {
    return tester.test(node, alpha, derive_seed(seed, node.id));
  } catch (const Error& e) {
    throw NodeTestError(node.id, node.label, e.what());
  }
}

inline void record(SearchResult& r, const SubgroupNode& node, TestOutcome outcome) {
  auto& rec = r.nodes[node.id];
  rec.status = outcome.rejected() ? NodeStatus::Rejected : NodeStatus::Accepted;
  rec.outcome = std::move(outcome);
  r.test_order.push_back(node.id);
  ++r.tests_performed;
  if (auto o = node.group.order()) r.computation_units += *o;
}

inline std::vector<TestOutcome> run_level(const NodeTester& tester, const std::vector<const SubgroupNode*>& nodes,
                                          double alpha, std::uint64_t seed, std::size_t level, bool batch) {
  if (batch && tester.test_level && !nodes.empty()) {
    try {
      return tester.test_level(nodes, alpha, derive_seed(seed, "level", level));
    } catch (const Error& e) {
      throw NodeTestError(nodes.front()->id, nodes.front()->label, std::string("batch level test: ") + e.what());
    }
  }
  std::vector<TestOutcome> out;
  for (const auto* n : nodes) out.push_back(run_node(tester, *n, alpha, seed));
  return out;
}

inline bool survives(NodeStatus s) { return s == NodeStatus::Accepted || s == NodeStatus::SkippedGreedy; }

}  // namespace detail

/// Maxima of `set` under the lattice order, in id order.
inline std::vector<NodeId> maxima(const Lattice& lat, const std::vector<NodeId>& set) {
  std::vector<NodeId> out;
  for (NodeId a : set) {
    bool top = true;
    for (NodeId b : set)
      if (lat.less(a, b)) top = false;
    if (top) out.push_back(a);
  }
  return out;
}

inline NodeId resolve_tilde(const std::vector<NodeId>& tilde, const Lattice& lat, TieRule rule, Rng& rng) {
  if (tilde.empty()) throw ArgumentError("tilde set is empty");
  if (rule == TieRule::UniformRandom) return tilde[uniform_index(rng, tilde.size())];
  NodeId m = tilde.front();
  for (std::size_t k = 1; k < tilde.size(); ++k) m = lat.meet(m, tilde[k]);
  return m;
}

namespace detail {

inline SearchResult breadth_first(const Lattice& lat, const NodeTester& tester, const SearchConfig& cfg, bool greedy) {
  validate_alpha(cfg.alpha);
  SearchResult r = fresh_result(lat);
  const auto levels = lat.levels();
  for (std::size_t i = 1; i < levels.size(); ++i) {
    std::vector<NodeId> below;
    for (NodeId p : levels[i - 1])
      if (survives(r.nodes[p].status)) below.push_back(p);
    std::vector<const SubgroupNode*> to_test;
    for (NodeId h : levels[i]) {
      if (r.nodes[h].status != NodeStatus::Untested) continue;
      if (greedy && lat.generated_by(h, below)) {
        r.nodes[h].status = NodeStatus::SkippedGreedy;
        continue;
      }
      to_test.push_back(&lat.node(h));
    }
    const auto outcomes = run_level(tester, to_test, level_alpha(cfg, i), cfg.seed, i, cfg.batch);
    std::vector<NodeId> rejected;
    for (std::size_t k = 0; k < to_test.size(); ++k) {
      record(r, *to_test[k], outcomes[k]);
      if (outcomes[k].rejected()) rejected.push_back(to_test[k]->id);
    }
    for (NodeId h : rejected)
      for (const auto& n : lat.nodes())
        if (lat.less(h, n.id) && r.nodes[n.id].status == NodeStatus::Untested) r.nodes[n.id].status = NodeStatus::Pruned;
  }
  std::vector<NodeId> alive;
  for (const auto& [id, rec] : r.nodes)
    if (survives(rec.status)) alive.push_back(id);
  r.tilde = maxima(lat, alive);
  Rng rng = make_rng(derive_seed(cfg.seed, "tie"));
  r.estimate = resolve_tilde(r.tilde, lat, cfg.tie_rule, rng);
  return r;
}

}  // namespace detail

inline SearchResult breadth_first_estimate(const Lattice& lat, const NodeTester& tester, const SearchConfig& cfg) {
  return detail::breadth_first(lat, tester, cfg, false);
}

inline SearchResult breadth_first_greedy_estimate(const Lattice& lat, const NodeTester& tester,
                                                  const SearchConfig& cfg) {
  return detail::breadth_first(lat, tester, cfg, true);
}

/// Levels are taken relative to the current sub-lattice K_G, whose first
/// level is the set of upper covers of G. Each accepted node raises the
/// level by one, so the loop runs at most height(lattice) times.
inline SearchResult depth_first_estimate(const Lattice& lat, const NodeTester& tester, const SearchConfig& cfg) {
  validate_alpha(cfg.alpha);
  SearchResult r = detail::fresh_result(lat);
  NodeId current = lat.bottom();
  for (std::size_t depth = 1;; ++depth) {
    std::optional<NodeId> next;
    for (NodeId h : lat.upper_covers(current)) {
      const auto& node = lat.node(h);
      auto out = detail::run_node(tester, node, level_alpha(cfg, depth), cfg.seed);
      const bool accepted = !out.rejected();
      detail::record(r, node, std::move(out));
      if (accepted) {
        next = h;
        break;
      }
    }
    if (!next) break;
    current = *next;
  }
  r.estimate = current;
  r.tilde = {current};
  return r;
}

inline SearchResult run_search(const Lattice& lat, const NodeTester& tester, const SearchConfig& cfg) {
  switch (cfg.algorithm) {
    case SearchAlgorithm::Breadth: return breadth_first_estimate(lat, tester, cfg);
    case SearchAlgorithm::BreadthGreedy: return breadth_first_greedy_estimate(lat, tester, cfg);
    case SearchAlgorithm::Depth: return depth_first_estimate(lat, tester, cfg);
  }
  throw ArgumentError("unknown search algorithm");
}

inline SearchResult breadth_first_estimate(const RegressionDataset& data, const Lattice& lat, const TestConfig& test,
                                           const SearchConfig& cfg) {
  return breadth_first_estimate(lat, data_tester(data, lat, test), cfg);
}

inline SearchResult breadth_first_greedy_estimate(const RegressionDataset& data, const Lattice& lat,
                                                  const TestConfig& test, const SearchConfig& cfg) {
  return breadth_first_greedy_estimate(lat, data_tester(data, lat, test), cfg);
}

inline SearchResult depth_first_estimate(const RegressionDataset& data, const Lattice& lat, const TestConfig& test,
                                         const SearchConfig& cfg) {
  return depth_first_estimate(lat, data_tester(data, lat, test), cfg);
}

// ---------------------------------------------------------------------------
// Diagnostics and output
// ---------------------------------------------------------------------------

struct BoundReport {
  std::size_t frontier_size = 0;        // |A|
  std::size_t subgroups_below = 0;      // |{H <= gmax}|
  double invariance_lower_bound = 0.0;  // P(f is G_hat-invariant) >= 1 - |A| (1 - P)
  double recovery_lower_bound = 0.0;    // P(G_hat_B = G_max) >= 1 - |{H <= gmax}| alpha - |A| (1 - P)
};

/// Bounds are clamped at 0.
inline BoundReport bound_diagnostics(const Lattice& lat, NodeId gmax, double power, double alpha) {
  if (!(power >= 0.0 && power <= 1.0) || !(alpha >= 0.0 && alpha <= 1.0))
    throw ArgumentError("power and alpha must lie in [0, 1]");
  BoundReport b;
  b.frontier_size = frontier(lat, gmax).size();
  b.subgroups_below = count_below(lat, gmax);
  const double miss = static_cast<double>(b.frontier_size) * (1.0 - power);
  b.invariance_lower_bound = std::max(0.0, 1.0 - miss);
  b.recovery_lower_bound = std::max(0.0, 1.0 - static_cast<double>(b.subgroups_below) * alpha - miss);
  return b;
}

/// CSV with columns node,label,status,p_value (p_value empty when untested).
inline void write_search_csv(std::ostream& out, const SearchResult& r) {
  out << "node,label,status,p_value\n";
  for (const auto& [id, rec] : r.nodes) {
    out << id << ',' << csv_field(rec.label) << ',' << to_string(rec.status) << ',';
    if (rec.outcome) out << format_number(rec.outcome->p_value);
    out << '\n';
  }
}

inline const char* status_color(NodeStatus s) {
  switch (s) {
    case NodeStatus::Accepted: return "palegreen";
    case NodeStatus::Rejected: return "salmon";
    case NodeStatus::Pruned: return "lightgrey";
    case NodeStatus::SkippedGreedy: return "lightblue";
    case NodeStatus::Untested: return "white";
  }
  return "white";
}

/// Graphviz Hasse diagram, bottom to top, nodes filled by status; the
/// estimate has a bold outline.
inline void write_hasse_annotation(std::ostream& out, const Lattice& lat, const SearchResult& r) {
  out << "digraph lattice {\n  rankdir=BT;\n  node [style=filled, shape=box];\n";
  for (const auto& [id, rec] : r.nodes) {
    std::string label = rec.label;
    std::string escaped;
    for (char c : label) {
      if (c == '"' || c == '\\') escaped += '\\';
      escaped += c;
    }
    out << "  n" << id << " [label=\"" << escaped << "\", fillcolor=" << status_color(rec.status)
        << ", class=\"" << to_string(rec.status) << "\"" << (id == r.estimate ? ", penwidth=3" : "") << "];\n";
  }
  for (auto [lo, hi] : lat.covers()) out << "  n" << lo << " -> n" << hi << ";\n";
  out << "}\n";
}

}  // namespace symlat
