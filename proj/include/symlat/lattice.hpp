#pragma once

// Finite sub-lattices of a closed-subgroup lattice: order, covers, meets,
// joins and height levels.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "symlat/error.hpp"
#include "symlat/group.hpp"

namespace symlat {

using NodeId = std::size_t;

struct SubgroupNode {
  NodeId id = 0;
  GroupDescriptor group;
  std::string label;
  std::size_t height = 0;
};

/// Declares that `node` is generated by any two distinct members of `parts`.
/// Needed for continuous groups, where joins cannot be computed from tables.
struct GenerationFact {
  NodeId node = 0;
  std::vector<NodeId> parts;
};

struct LatticeOptions {
  bool require_trivial_bottom = true;
};

class Lattice {
 public:
  using Options = LatticeOptions;

  Lattice(std::vector<SubgroupNode> nodes, GroupAction ambient,
          std::vector<std::pair<NodeId, NodeId>> declared_leq = {}, std::vector<GenerationFact> facts = {},
          Options options = {})
      : nodes_(std::move(nodes)),
        ambient_(std::move(ambient)),
        declared_(std::move(declared_leq)),
        facts_(std::move(facts)),
        options_(options) {
    build();
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<SubgroupNode>& nodes() const noexcept { return nodes_; }
  const SubgroupNode& node(NodeId id) const { return nodes_[pos(id)]; }
  bool has(NodeId id) const { return pos_.count(id) != 0; }
  const GroupAction& ambient() const noexcept { return ambient_; }
  const std::vector<std::pair<NodeId, NodeId>>& declared_leq() const noexcept { return declared_; }
  const std::vector<GenerationFact>& generation_facts() const noexcept { return facts_; }
  const Options& options() const noexcept { return options_; }

  std::vector<NodeId> ids() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes_) out.push_back(n.id);
    return out;
  }

  bool leq(NodeId a, NodeId b) const { return leq_[pos(a) * size() + pos(b)]; }
  bool less(NodeId a, NodeId b) const { return a != b && leq(a, b); }

  NodeId bottom() const noexcept { return nodes_[bottom_].id; }
  NodeId top() const noexcept { return nodes_[top_].id; }
  NodeId meet(NodeId a, NodeId b) const { return nodes_[meet_[pos(a) * size() + pos(b)]].id; }
  NodeId join(NodeId a, NodeId b) const { return nodes_[join_[pos(a) * size() + pos(b)]].id; }
  std::size_t height(NodeId id) const { return node(id).height; }
  std::size_t lattice_height() const { return levels_.size() - 1; }

  /// Hasse edges (lower, upper), sorted.
  const std::vector<std::pair<NodeId, NodeId>>& covers() const noexcept { return covers_; }
  const std::vector<std::vector<NodeId>>& levels() const noexcept { return levels_; }

  std::vector<NodeId> upper_covers(NodeId id) const {
    std::vector<NodeId> out;
    for (auto [lo, hi] : covers_)
      if (lo == id) out.push_back(hi);
    return out;
  }
  std::vector<NodeId> lower_covers(NodeId id) const {
    std::vector<NodeId> out;
    for (auto [lo, hi] : covers_)
      if (hi == id) out.push_back(lo);
    return out;
  }

  std::optional<NodeId> find_label(const std::string& label) const {
    for (const auto& n : nodes_)
      if (n.label == label) return n.id;
    return std::nullopt;
  }

  /// True when `h` is the subgroup generated by the nodes in `parts`, all of
  /// which must lie strictly below `h`. Finite nodes use table closure,
  /// others use declared generation facts.
  bool generated_by(NodeId h, const std::vector<NodeId>& parts) const {
    std::vector<NodeId> below;
    for (NodeId p : parts)
      if (less(p, h)) below.push_back(p);
    if (below.size() < 2) return false;
    const auto& H = node(h).group;
    bool all_finite = H.kind == GroupKind::Finite;
    for (NodeId p : below) {
      const auto& P = node(p).group;
      all_finite = all_finite && P.kind == GroupKind::Finite && (P.table == H.table || P.is_trivial());
    }
    if (all_finite) {
      std::vector<std::size_t> gens;
      for (NodeId p : below) {
        const auto& P = node(p).group;
        if (P.table == H.table) gens.insert(gens.end(), P.members.begin(), P.members.end());
      }
      if (gens.empty()) return H.is_trivial();
      return H.table->closure(gens) == H.members;
    }
    for (const auto& f : facts_) {
      if (f.node != h) continue;
      std::size_t hits = 0;
      for (NodeId p : below)
        if (std::find(f.parts.begin(), f.parts.end(), p) != f.parts.end()) ++hits;
      if (hits >= 2) return true;
    }
    return false;
  }

 private:
  std::size_t pos(NodeId id) const {
    auto it = pos_.find(id);
    if (it == pos_.end()) throw ArgumentError("node id " + std::to_string(id) + " is not in the lattice");
    return it->second;
  }

  static bool same_group(const GroupDescriptor& a, const GroupDescriptor& b) {
    if (a.is_trivial() && b.is_trivial()) return true;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case GroupKind::Finite: return a.table == b.table && a.members == b.members;
      case GroupKind::CircleAxis: return std::abs(std::abs(a.axis.dot(b.axis)) - 1.0) <= kAxisTolerance * 100;
      case GroupKind::CirclePlane:
        return std::minmax(a.plane_i, a.plane_j) == std::minmax(b.plane_i, b.plane_j);
      case GroupKind::SO3:
      case GroupKind::SL3: return true;
      default: return false;
    }
  }

  void build() {
    const std::size_t n = nodes_.size();
    if (n == 0) throw InvalidLattice("lattice needs at least one node");
    for (std::size_t i = 0; i < n; ++i) {
      if (!pos_.emplace(nodes_[i].id, i).second)
        throw DuplicateNode("node id " + std::to_string(nodes_[i].id) + " appears twice");
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (same_group(nodes_[i].group, nodes_[j].group))
          throw DuplicateNode("nodes '" + nodes_[i].label + "' and '" + nodes_[j].label + "' are the same group");

    leq_.assign(n * n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = nodes_[i].group;
      for (std::size_t j = 0; j < n; ++j) {
        const auto& b = nodes_[j].group;
        bool le = i == j || a.is_trivial();
        if (!le && a.kind == GroupKind::Finite && b.kind == GroupKind::Finite && a.table == b.table)
          le = std::includes(b.members.begin(), b.members.end(), a.members.begin(), a.members.end());
        leq_[i * n + j] = le;
      }
    }
    for (auto [lo, hi] : declared_) leq_[pos(lo) * n + pos(hi)] = true;
    // transitive closure (Warshall)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (leq_[i * n + k])
          for (std::size_t j = 0; j < n; ++j)
            if (leq_[k * n + j]) leq_[i * n + j] = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (leq_[i * n + j] && leq_[j * n + i])
          throw InvalidLattice("order is not antisymmetric on '" + nodes_[i].label + "' and '" + nodes_[j].label + "'");

    std::vector<std::size_t> bottoms, tops;
    for (std::size_t i = 0; i < n; ++i) {
      bool is_bottom = true, is_top = true;
      for (std::size_t j = 0; j < n; ++j) {
        is_bottom = is_bottom && leq_[i * n + j];
        is_top = is_top && leq_[j * n + i];
      }
      if (is_bottom) bottoms.push_back(i);
      if (is_top) tops.push_back(i);
    }
    if (bottoms.size() != 1) throw InvalidLattice("lattice has no unique bottom element");
    if (tops.size() != 1) throw InvalidLattice("lattice has no unique top element");
    bottom_ = bottoms.front();
    top_ = tops.front();
    if (options_.require_trivial_bottom && !nodes_[bottom_].group.is_trivial())
      throw InvalidLattice("lattice bottom must be the trivial group");

    meet_.assign(n * n, 0);
    join_.assign(n * n, 0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        meet_[a * n + b] = extremal_bound(a, b, true);
        join_[a * n + b] = extremal_bound(a, b, false);
      }
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (meet_[a * n + join_[a * n + b]] != a || join_[a * n + meet_[a * n + b]] != a)
          throw InvalidLattice("absorption law fails");

    covers_.clear();
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b || !leq_[a * n + b]) continue;
        bool direct = true;
        for (std::size_t c = 0; c < n && direct; ++c)
          if (c != a && c != b && leq_[a * n + c] && leq_[c * n + b]) direct = false;
        if (direct) covers_.emplace_back(nodes_[a].id, nodes_[b].id);
      }
    }
    std::sort(covers_.begin(), covers_.end());

    // longest chain from the bottom, in a topological order of the DAG
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<std::size_t> below_count(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (leq_[j * n + i]) ++below_count[i];
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return below_count[x] < below_count[y]; });
    std::vector<std::size_t> h(n, 0);
    for (std::size_t i : order)
      for (auto [lo, hi] : covers_)
        if (hi == nodes_[i].id) h[i] = std::max(h[i], h[pos(lo)] + 1);
    std::size_t max_h = 0;
    for (std::size_t i = 0; i < n; ++i) {
      nodes_[i].height = h[i];
      max_h = std::max(max_h, h[i]);
    }
    levels_.assign(max_h + 1, {});
    for (const auto& node : nodes_) levels_[node.height].push_back(node.id);
    for (auto& level : levels_) std::sort(level.begin(), level.end());
  }

  // Greatest lower bound (want_meet) or least upper bound of positions a, b.
  std::size_t extremal_bound(std::size_t a, std::size_t b, bool want_meet) const {
    const std::size_t n = nodes_.size();
    std::vector<std::size_t> bounds;
    for (std::size_t c = 0; c < n; ++c) {
      bool ok = want_meet ? leq_[c * n + a] && leq_[c * n + b] : leq_[a * n + c] && leq_[b * n + c];
      if (ok) bounds.push_back(c);
    }
    for (std::size_t c : bounds) {
      bool extreme = true;
      for (std::size_t d : bounds)
        if (want_meet ? !leq_[d * n + c] : !leq_[c * n + d]) extreme = false;
      if (extreme) return c;
    }
    throw InvalidLattice(std::string("no unique ") + (want_meet ? "meet" : "join") + " for '" + nodes_[a].label +
                         "' and '" + nodes_[b].label + "'");
  }

  std::vector<SubgroupNode> nodes_;
  GroupAction ambient_;
  std::vector<std::pair<NodeId, NodeId>> declared_;
  std::vector<GenerationFact> facts_;
  Options options_;
  std::map<NodeId, std::size_t> pos_;
  std::vector<bool> leq_;
  std::vector<std::size_t> meet_, join_;
  std::vector<std::pair<NodeId, NodeId>> covers_;
  std::vector<std::vector<NodeId>> levels_;
  std::size_t bottom_ = 0, top_ = 0;
};

inline NodeId meet(const Lattice& lat, NodeId a, NodeId b) { return lat.meet(a, b); }
inline NodeId join(const Lattice& lat, NodeId a, NodeId b) { return lat.join(a, b); }

/// Level i holds the nodes whose longest chain from the bottom has length i;
/// each level is sorted by node id.
inline std::vector<std::vector<NodeId>> enumerate_by_height(const Lattice& lat) { return lat.levels(); }

namespace detail {
inline std::vector<std::pair<NodeId, NodeId>> declared_within(const Lattice& lat, const std::set<NodeId>& keep) {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (auto [lo, hi] : lat.declared_leq())
    if (keep.count(lo) && keep.count(hi)) out.emplace_back(lo, hi);
  return out;
}

inline std::vector<GenerationFact> facts_within(const Lattice& lat, const std::set<NodeId>& keep) {
  std::vector<GenerationFact> out;
  for (const auto& f : lat.generation_facts()) {
    if (!keep.count(f.node)) continue;
    GenerationFact g{f.node, {}};
    for (NodeId p : f.parts)
      if (keep.count(p)) g.parts.push_back(p);
    if (g.parts.size() >= 2) out.push_back(std::move(g));
  }
  return out;
}
}  // namespace detail

/// Induced lattice on {H : g <= H}. Node ids are preserved.
inline Lattice sublattice_above(const Lattice& lat, NodeId g) {
  std::vector<SubgroupNode> nodes;
  std::set<NodeId> keep;
  for (const auto& n : lat.nodes()) {
    if (lat.leq(g, n.id)) {
      nodes.push_back(n);
      keep.insert(n.id);
    }
  }
  // Declared relations of the parent are re-expressed as the full parent
  // order restricted to the kept nodes, so nothing is lost.
  std::vector<std::pair<NodeId, NodeId>> rel;
  for (NodeId a : keep)
    for (NodeId b : keep)
      if (a != b && lat.leq(a, b)) rel.emplace_back(a, b);
  return Lattice(std::move(nodes), lat.ambient(), std::move(rel), detail::facts_within(lat, keep),
                 Lattice::Options{false});
}

/// Appends `g` above every node. For finite groups on the same table the
/// supergroup relation is verified; otherwise it is taken on trust.
inline Lattice add_top(const Lattice& lat, GroupDescriptor g, std::string label) {
  if (g.kind == GroupKind::Finite) {
    for (const auto& n : lat.nodes()) {
      const auto& h = n.group;
      if (h.is_trivial()) continue;
      if (h.kind != GroupKind::Finite || h.table != g.table ||
          !std::includes(g.members.begin(), g.members.end(), h.members.begin(), h.members.end()))
        throw NotASupergroup("'" + label + "' does not contain node '" + n.label + "'");
    }
  }
  NodeId new_id = 0;
  for (const auto& n : lat.nodes()) new_id = std::max(new_id, n.id + 1);
  std::vector<SubgroupNode> nodes = lat.nodes();
  g.label = label;
  nodes.push_back(SubgroupNode{new_id, std::move(g), std::move(label), 0});
  std::vector<std::pair<NodeId, NodeId>> rel = lat.declared_leq();
  for (const auto& n : lat.nodes()) rel.emplace_back(n.id, new_id);
  return Lattice(std::move(nodes), lat.ambient(), std::move(rel), lat.generation_facts(), lat.options());
}

/// Nodes H not below gmax whose strict subnodes are all below gmax and which
/// cover some node below gmax.
inline std::vector<NodeId> frontier(const Lattice& lat, NodeId gmax) {
  std::vector<NodeId> out;
  for (const auto& h : lat.nodes()) {
    if (lat.leq(h.id, gmax)) continue;
    bool all_below = true;
    for (const auto& k : lat.nodes())
      if (lat.less(k.id, h.id) && !lat.leq(k.id, gmax)) all_below = false;
    if (!all_below) continue;
    bool covers_one = false;
    for (NodeId lo : lat.lower_covers(h.id))
      if (lat.leq(lo, gmax)) covers_one = true;
    if (covers_one) out.push_back(h.id);
  }
  return out;
}

/// Number of nodes H with H <= g.
inline std::size_t count_below(const Lattice& lat, NodeId g) {
  std::size_t c = 0;
  for (const auto& n : lat.nodes())
    if (lat.leq(n.id, g)) ++c;
  return c;
}

}  // namespace symlat
