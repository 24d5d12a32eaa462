#pragma once

// Builders for the standard example lattices.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "symlat/group.hpp"
#include "symlat/lattice.hpp"

namespace symlat {

namespace detail {

inline std::string subgroup_label(const FiniteGroup& table, const std::vector<std::size_t>& gens) {
  if (gens.empty()) return "I";
  std::string s = "<";
  for (std::size_t k = 0; k < gens.size(); ++k) s += (k ? "," : "") + table.label(gens[k]);
  return s + ">";
}

inline SubgroupNode finite_node(NodeId id, const FiniteGroupPtr& table, std::vector<std::size_t> gens, std::string label) {
  auto g = finite_subgroup(table, gens, label);
  return SubgroupNode{id, std::move(g), std::move(label), 0};
}

}  // namespace detail

/// Planar images of the square symmetries acting on coordinates (0, 1) of R^dim.
inline std::vector<GroupElement> square_symmetry_images() {
  const double pi = std::numbers::pi;
  return {make_planar(0.0), make_planar(0.0, 0, 1, true), make_planar(pi, 0, 1, true), make_planar(pi / 2, 0, 1, true),
          make_planar(3 * pi / 2, 0, 1, true), make_planar(pi / 2), make_planar(pi), make_planar(3 * pi / 2)};
}

inline GroupAction d4_action(std::size_t dim = 2) {
  if (dim < 2) throw DimensionMismatch("D4 acts on at least two coordinates");
  return finite_action(whole_group(FiniteGroup::square_symmetries(), "D4"), dim, square_symmetry_images());
}

/// The ten-node subgroup lattice of D4. Ids: 0 I, 1 <R_h>, 2 <R_v>, 3 <R_pi>,
/// 4 <R_/>, 5 <R_\>, 6 <R_h,R_pi>, 7 <R_pi/2>, 8 <R_/,R_pi>, 9 D4.
inline Lattice d4_lattice(std::size_t dim = 2) {
  GroupAction action = d4_action(dim);
  const FiniteGroupPtr t = action.group.table;
  std::vector<SubgroupNode> nodes{
      detail::finite_node(0, t, {0}, "I"),
      detail::finite_node(1, t, {1}, "<R_h>"),
      detail::finite_node(2, t, {2}, "<R_v>"),
      detail::finite_node(3, t, {6}, "<R_pi>"),
      detail::finite_node(4, t, {3}, "<R_/>"),
      detail::finite_node(5, t, {4}, "<R_\\>"),
      detail::finite_node(6, t, {1, 6}, "<R_h,R_pi>"),
      detail::finite_node(7, t, {5}, "<R_pi/2>"),
      detail::finite_node(8, t, {3, 6}, "<R_/,R_pi>"),
      detail::finite_node(9, t, {1, 5}, "D4"),
  };
  return Lattice(std::move(nodes), std::move(action));
}

/// Rotation action of C_n on the (i, j) coordinate plane: element k turns by
/// 2 pi k / n, optionally scaled by `speed` (speed 2 gives the doubled action).
inline GroupAction cyclic_rotation_action(std::size_t n, std::size_t dim = 2, std::size_t speed = 1) {
  if (dim < 2) throw DimensionMismatch("rotation action needs at least two coordinates");
  auto table = FiniteGroup::cyclic(n);
  std::vector<GroupElement> images;
  for (std::size_t k = 0; k < n; ++k)
    images.push_back(make_planar(kTwoPi * static_cast<double>((k * speed) % n) / static_cast<double>(n)));
  return finite_action(whole_group(table, "C" + std::to_string(n)), dim, std::move(images));
}

/// Chain I < C_{o1} < C_{o2} < ... inside C_N with N the largest order.
/// Each order must divide the next; a leading 1 is optional.
/// `speed` is passed to cyclic_rotation_action.
inline Lattice cyclic_chain_lattice(std::vector<std::size_t> orders, std::size_t dim = 2, std::size_t speed = 1) {
  if (orders.empty() || orders.front() != 1) orders.insert(orders.begin(), 1);
  for (std::size_t k = 1; k < orders.size(); ++k)
    if (orders[k] <= orders[k - 1] || orders[k] % orders[k - 1] != 0)
      throw ArgumentError("chain orders must be strictly increasing and each divide the next");
  const std::size_t top = orders.back();
  GroupAction action = cyclic_rotation_action(top, dim, speed);
  std::vector<SubgroupNode> nodes;
  for (std::size_t k = 0; k < orders.size(); ++k) {
    std::string label = orders[k] == 1 ? "I" : "C" + std::to_string(orders[k]);
    nodes.push_back(detail::finite_node(k, action.group.table, {top / orders[k] % top}, label));
  }
  return Lattice(std::move(nodes), std::move(action));
}

/// Every subgroup of a finite table group, with ids ordered by (order, members).
inline Lattice full_subgroup_lattice(const GroupAction& action) {
  if (action.group.kind != GroupKind::Finite) throw NotFinite("full subgroup lattice needs a finite group");
  const FiniteGroupPtr t = action.group.table;
  // every subgroup is the join of its cyclic subgroups
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> found;  // members -> generators
  for (std::size_t g : action.group.members) {
    std::vector<std::size_t> gens = g == t->identity() ? std::vector<std::size_t>{} : std::vector<std::size_t>{g};
    found.emplace(t->closure(std::vector<std::size_t>{g}), gens);
  }
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> snapshot(found.begin(), found.end());
    for (std::size_t a = 0; a < snapshot.size(); ++a) {
      for (std::size_t b = a + 1; b < snapshot.size(); ++b) {
        std::vector<std::size_t> u = snapshot[a].first;
        u.insert(u.end(), snapshot[b].first.begin(), snapshot[b].first.end());
        auto members = t->closure(u);
        if (!found.count(members)) {
          auto gens = snapshot[a].second;
          gens.insert(gens.end(), snapshot[b].second.begin(), snapshot[b].second.end());
          found.emplace(members, gens);
          grew = true;
        }
      }
    }
  }
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> subgroups(found.begin(), found.end());
  std::stable_sort(subgroups.begin(), subgroups.end(),
                   [](const auto& x, const auto& y) { return x.first.size() < y.first.size(); });
  std::vector<SubgroupNode> nodes;
  for (std::size_t k = 0; k < subgroups.size(); ++k) {
    auto& [members, gens] = subgroups[k];
    std::string label = members.size() == t->order() && !action.group.label.empty() ? action.group.label
                                                                                  : detail::subgroup_label(*t, gens);
    GroupDescriptor g;
    g.kind = GroupKind::Finite;
    g.table = t;
    g.members = members;
    g.label = label;
    if (gens.empty()) gens.push_back(t->identity());
    for (std::size_t i : gens) g.generators.push_back(make_finite(t, i));
    nodes.push_back(SubgroupNode{k, std::move(g), label, 0});
  }
  return Lattice(std::move(nodes), action);
}

/// Subgroup lattice of a bare table group acting trivially on R^dim.
inline Lattice full_subgroup_lattice(FiniteGroupPtr table, std::size_t dim = 1, std::string label = "G") {
  return full_subgroup_lattice(trivial_action(whole_group(std::move(table), std::move(label)), dim));
}

/// C2 x C2 acting on the plane by the two axis reflections.
inline GroupAction klein_action() {
  auto c2 = FiniteGroup::cyclic(2);
  auto table = FiniteGroup::direct_product(*c2, *c2);
  const double pi = std::numbers::pi;
  // (0,0) identity, (0,1) flip y, (1,0) flip x, (1,1) half turn
  std::vector<GroupElement> images{make_planar(0.0), make_planar(0.0, 0, 1, true), make_planar(pi, 0, 1, true),
                                   make_planar(pi)};
  return finite_action(whole_group(table, "C2xC2"), 2, std::move(images));
}

inline Lattice klein_lattice() { return full_subgroup_lattice(klein_action()); }

/// I, one S^1 per axis, and (optionally) SO(3) on top, which is declared to
/// be generated by any two of the circles.
inline Lattice so3_axes_lattice(const std::vector<Vector3>& axes, bool include_top = true) {
  std::vector<SubgroupNode> nodes{SubgroupNode{0, trivial_group("I"), "I", 0}};
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const double norm = axes[k].norm();
    if (!(norm > 0.0)) throw ArgumentError("axis " + std::to_string(k + 1) + " is zero");
    std::string label = "S1_u" + std::to_string(k + 1);
    nodes.push_back(SubgroupNode{k + 1, circle_about_axis(axes[k] / norm, label), label, 0});
  }
  std::vector<std::pair<NodeId, NodeId>> rel;
  std::vector<GenerationFact> facts;
  if (include_top) {
    const NodeId top = axes.size() + 1;
    nodes.push_back(SubgroupNode{top, so3_group("SO(3)"), "SO(3)", 0});
    GenerationFact fact{top, {}};
    for (std::size_t k = 0; k < axes.size(); ++k) {
      rel.emplace_back(k + 1, top);
      fact.parts.push_back(k + 1);
    }
    facts.push_back(std::move(fact));
  }
  return Lattice(std::move(nodes), matrix_action(so3_group()), std::move(rel), std::move(facts));
}

/// Vertex axes of a regular icosahedron (six lines through opposite vertices).
inline std::vector<Vector3> icosahedral_axes() {
  const double phi = std::numbers::phi;
  std::vector<Vector3> axes{{0, 1, phi}, {0, 1, -phi}, {1, phi, 0}, {-1, phi, 0}, {phi, 0, 1}, {phi, 0, -1}};
  for (auto& a : axes) a.normalize();
  return axes;
}

/// Icosahedral axes, the same set turned 36 degrees about the z axis, and the
/// three coordinate axes (z, y, x): fifteen axes in all.
inline std::vector<Vector3> fifteen_axes() {
  auto axes = icosahedral_axes();
  const Matrix3 turn = rotation_about(Vector3::UnitZ(), std::numbers::pi / 5);
  const std::size_t base = axes.size();
  for (std::size_t k = 0; k < base; ++k) axes.push_back(turn * axes[k]);
  axes.push_back(Vector3::UnitZ());
  axes.push_back(Vector3::UnitY());
  axes.push_back(Vector3::UnitX());
  return axes;
}

/// so3_axes_lattice(axes) with SL(3) added on top.
inline Lattice sl3_extended_lattice(const std::vector<Vector3>& axes = icosahedral_axes()) {
  Lattice base = so3_axes_lattice(axes, true);
  Lattice out = add_top(base, sl3_group("SL(3)"), "SL(3)");
  return Lattice(out.nodes(), matrix_action(sl3_group()), out.declared_leq(), out.generation_facts());
}

/// D4 acting on side x side images (row-major pixels) by rotating and
/// reflecting the pixel grid about its centre.
inline GroupAction d4_image_action(std::size_t side) {
  if (side == 0) throw ArgumentError("image side must be positive");
  auto table = FiniteGroup::square_symmetries();
  const auto& mats = FiniteGroup::square_symmetry_matrices();
  const long s = static_cast<long>(side);
  std::vector<GroupElement> images;
  for (std::size_t g = 0; g < 8; ++g) {
    const auto& m = mats[table->inverse(g)];
    std::vector<std::size_t> map(side * side);
    for (long r = 0; r < s; ++r) {
      for (long c = 0; c < s; ++c) {
        // doubled centred coordinates keep everything integral
        const long x = 2 * c - (s - 1), y = (s - 1) - 2 * r;
        const long x2 = m[0] * x + m[1] * y, y2 = m[2] * x + m[3] * y;
        const long c2 = (x2 + (s - 1)) / 2, r2 = ((s - 1) - y2) / 2;
        map[static_cast<std::size_t>(r * s + c)] = static_cast<std::size_t>(r2 * s + c2);
      }
    }
    images.push_back(make_permutation(std::move(map)));
  }
  return finite_action(whole_group(table, "D4"), side * side, std::move(images));
}

/// d4_lattice with the image action on side x side pixel grids.
inline Lattice d4_image_lattice(std::size_t side) {
  Lattice base = d4_lattice();
  return Lattice(base.nodes(), d4_image_action(side));
}

}  // namespace symlat
