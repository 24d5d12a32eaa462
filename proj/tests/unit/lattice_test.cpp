#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "symlat/lattice.hpp"
#include "symlat/lattice_builders.hpp"

using namespace symlat;

namespace {

using MemberSet = std::vector<std::size_t>;

// Every subset of the table closed under products, found by exhaustive search.
std::vector<MemberSet> brute_force_subgroups(const FiniteGroup& g) {
  std::vector<MemberSet> out;
  const std::size_t n = g.order();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    MemberSet s;
    for (std::size_t k = 0; k < n; ++k)
      if (mask >> k & 1) s.push_back(k);
    if (g.is_subgroup(s)) out.push_back(s);
  }
  return out;
}

bool subset(const MemberSet& a, const MemberSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

std::set<std::pair<MemberSet, MemberSet>> brute_force_covers(const std::vector<MemberSet>& subs) {
  std::set<std::pair<MemberSet, MemberSet>> out;
  for (const auto& a : subs)
    for (const auto& b : subs) {
      if (a == b || !subset(a, b)) continue;
      bool direct = true;
      for (const auto& c : subs)
        if (c != a && c != b && subset(a, c) && subset(c, b)) direct = false;
      if (direct) out.emplace(a, b);
    }
  return out;
}

MemberSet intersect(const MemberSet& a, const MemberSet& b) {
  MemberSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void expect_matches_brute_force(const Lattice& lat) {
  const auto& table = *lat.ambient().group.table;
  auto subs = brute_force_subgroups(table);
  ASSERT_EQ(lat.size(), subs.size());
  std::set<MemberSet> ours;
  for (const auto& n : lat.nodes()) ours.insert(n.group.members);
  EXPECT_EQ(ours, std::set<MemberSet>(subs.begin(), subs.end()));
  std::set<std::pair<MemberSet, MemberSet>> cov;
  for (auto [lo, hi] : lat.covers()) cov.emplace(lat.node(lo).group.members, lat.node(hi).group.members);
  EXPECT_EQ(cov, brute_force_covers(subs));
  for (const auto& a : lat.nodes())
    for (const auto& b : lat.nodes()) {
      const auto& A = a.group.members;
      const auto& B = b.group.members;
      EXPECT_EQ(lat.node(lat.meet(a.id, b.id)).group.members, intersect(A, B));
      MemberSet u = A;
      u.insert(u.end(), B.begin(), B.end());
      EXPECT_EQ(lat.node(lat.join(a.id, b.id)).group.members, table.closure(u));
      EXPECT_EQ(lat.leq(a.id, b.id), subset(A, B));
    }
}

NodeId id_of(const Lattice& lat, const std::string& label) { return *lat.find_label(label); }

}  // namespace

TEST(D4Lattice, MatchesBruteForce) {
  Lattice lat = d4_lattice();
  EXPECT_EQ(lat.size(), 10u);
  expect_matches_brute_force(lat);
}

TEST(D4Lattice, LevelsAndHeights) {
  Lattice lat = d4_lattice();
  auto levels = enumerate_by_height(lat);
  ASSERT_EQ(levels.size(), 4u);
  EXPECT_EQ(levels[0], (std::vector<NodeId>{0}));
  EXPECT_EQ(levels[1], (std::vector<NodeId>{1, 2, 3, 4, 5}));
  EXPECT_EQ(levels[2], (std::vector<NodeId>{6, 7, 8}));
  EXPECT_EQ(levels[3], (std::vector<NodeId>{9}));
  for (auto [lo, hi] : lat.covers()) EXPECT_GT(lat.height(hi), lat.height(lo));
}

TEST(D4Lattice, MeetsAndJoins) {
  Lattice lat = d4_lattice();
  EXPECT_EQ(meet(lat, id_of(lat, "<R_pi/2>"), id_of(lat, "<R_/,R_pi>")), id_of(lat, "<R_pi>"));
  EXPECT_EQ(meet(lat, id_of(lat, "<R_h>"), id_of(lat, "<R_h>")), id_of(lat, "<R_h>"));
  EXPECT_EQ(meet(lat, id_of(lat, "<R_h>"), id_of(lat, "<R_v>")), lat.bottom());
  const auto t = FiniteGroup::square_symmetries();
  MemberSet expected{*t->index_of("I"), *t->index_of("R_h"), *t->index_of("R_v"), *t->index_of("R_pi")};
  EXPECT_EQ(lat.node(join(lat, id_of(lat, "<R_h>"), id_of(lat, "<R_v>"))).group.members, expected);
  for (NodeId a : lat.ids()) EXPECT_EQ(join(lat, a, lat.bottom()), a);
}

TEST(D4Lattice, SublatticeAbove) {
  Lattice lat = d4_lattice();
  EXPECT_EQ(sublattice_above(lat, lat.bottom()).size(), 10u);
  Lattice above = sublattice_above(lat, id_of(lat, "<R_pi>"));
  std::set<std::string> labels;
  for (const auto& n : above.nodes()) labels.insert(n.label);
  EXPECT_EQ(labels, (std::set<std::string>{"<R_pi>", "<R_h,R_pi>", "<R_pi/2>", "<R_/,R_pi>", "D4"}));
  EXPECT_EQ(above.bottom(), id_of(lat, "<R_pi>"));
  EXPECT_EQ(enumerate_by_height(above)[1], (std::vector<NodeId>{6, 7, 8}));
  Lattice top_only = sublattice_above(lat, lat.top());
  EXPECT_EQ(top_only.size(), 1u);
  EXPECT_EQ(top_only.bottom(), lat.top());
}

TEST(D4Lattice, Frontier) {
  Lattice lat = d4_lattice();
  auto f = frontier(lat, id_of(lat, "<R_pi/2>"));
  std::vector<NodeId> expected{id_of(lat, "<R_h>"), id_of(lat, "<R_v>"), id_of(lat, "<R_/>"), id_of(lat, "<R_\\>")};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(f, expected);
  EXPECT_TRUE(frontier(lat, lat.top()).empty());
}

TEST(ChainLattice, C4Chain) {
  Lattice lat = cyclic_chain_lattice({1, 2, 4});
  EXPECT_EQ(lat.size(), 3u);
  auto levels = enumerate_by_height(lat);
  ASSERT_EQ(levels.size(), 3u);
  for (const auto& l : levels) EXPECT_EQ(l.size(), 1u);
  const NodeId c2 = id_of(lat, "C2"), c4 = id_of(lat, "C4");
  EXPECT_EQ(join(lat, c2, c4), c4);
  EXPECT_EQ(frontier(lat, c2), (std::vector<NodeId>{c4}));
  EXPECT_EQ(count_below(lat, c2), 2u);
  EXPECT_THROW(cyclic_chain_lattice({1, 3, 4}), ArgumentError);
}

TEST(ChainLattice, UpToC8) {
  Lattice lat = cyclic_chain_lattice({1, 2, 4, 8});
  EXPECT_EQ(lat.size(), 4u);
  EXPECT_EQ(lat.lattice_height(), 3u);
}

TEST(FullSubgroupLattice, SmallGroupsSatisfyInvariants) {
  std::vector<FiniteGroupPtr> groups{FiniteGroup::cyclic(1),  FiniteGroup::cyclic(6),  FiniteGroup::cyclic(12),
                                     FiniteGroup::dihedral(3), FiniteGroup::dihedral(4), FiniteGroup::dihedral(6),
                                     FiniteGroup::direct_product(*FiniteGroup::cyclic(2), *FiniteGroup::cyclic(4)),
                                     FiniteGroup::direct_product(*FiniteGroup::cyclic(4), *FiniteGroup::cyclic(4))};
  for (const auto& g : groups) {
    Lattice lat = full_subgroup_lattice(g);
    expect_matches_brute_force(lat);
  }
}

TEST(FullSubgroupLattice, D4AgreesWithBuilder) {
  Lattice full = full_subgroup_lattice(d4_action());
  Lattice built = d4_lattice();
  std::set<MemberSet> a, b;
  for (const auto& n : full.nodes()) a.insert(n.group.members);
  for (const auto& n : built.nodes()) b.insert(n.group.members);
  EXPECT_EQ(a, b);
}

TEST(So3Lattice, IcosahedralAxes) {
  Lattice lat = so3_axes_lattice(icosahedral_axes(), true);
  EXPECT_EQ(lat.size(), 8u);
  auto levels = enumerate_by_height(lat);
  ASSERT_EQ(levels.size(), 3u);
  EXPECT_EQ(levels[1].size(), 6u);
  const NodeId top = lat.top();
  EXPECT_TRUE(lat.generated_by(top, {1, 2}));
  EXPECT_FALSE(lat.generated_by(top, {1}));
  EXPECT_EQ(join(lat, 1, 2), top);
  EXPECT_EQ(meet(lat, 1, 2), lat.bottom());
}

TEST(So3Lattice, CollinearAxesAreDuplicates) {
  EXPECT_THROW(so3_axes_lattice({Vector3(0, 0, 1), Vector3(0, 0, -2)}), DuplicateNode);
}

TEST(So3Lattice, FifteenAxes) {
  Lattice lat = so3_axes_lattice(fifteen_axes(), true);
  EXPECT_EQ(lat.size(), 17u);
}

TEST(Sl3Lattice, NineNodes) {
  Lattice lat = sl3_extended_lattice();
  EXPECT_EQ(lat.size(), 9u);
  auto levels = enumerate_by_height(lat);
  ASSERT_EQ(levels.size(), 4u);
  EXPECT_EQ(levels[1].size(), 6u);
  EXPECT_EQ(lat.node(lat.top()).label, "SL(3)");
  EXPECT_EQ(lat.node(levels[2][0]).label, "SO(3)");
}

TEST(AddTop, ExtendsLevels) {
  Lattice single({SubgroupNode{0, trivial_group(), "I", 0}}, trivial_action(trivial_group(), 3));
  Lattice two = add_top(single, so3_group(), "SO(3)");
  EXPECT_EQ(two.size(), 2u);
  EXPECT_EQ(enumerate_by_height(two).size(), 2u);

  Lattice d4 = d4_lattice();
  auto t = FiniteGroup::square_symmetries();
  GroupDescriptor c4 = finite_subgroup(t, {*t->index_of("R_pi/2")}, "C4");
  std::vector<SubgroupNode> small{d4.node(0), d4.node(3)};
  Lattice chain(small, d4.ambient());
  Lattice extended = add_top(chain, c4, "C4");
  EXPECT_EQ(enumerate_by_height(extended).size(), 3u);
  EXPECT_THROW(add_top(d4, c4, "C4x"), NotASupergroup);
}

TEST(LatticeValidation, RejectsNonLattices) {
  auto t = FiniteGroup::square_symmetries();
  // two incomparable order-2 subgroups with no top
  std::vector<SubgroupNode> nodes{SubgroupNode{0, finite_subgroup(t, {0}, "I"), "I", 0},
                                  SubgroupNode{1, finite_subgroup(t, {1}, "a"), "a", 0},
                                  SubgroupNode{2, finite_subgroup(t, {2}, "b"), "b", 0}};
  EXPECT_THROW(Lattice(nodes, d4_action()), InvalidLattice);
  nodes.push_back(SubgroupNode{3, finite_subgroup(t, {1}, "a2"), "a2", 0});
  EXPECT_THROW(Lattice(nodes, d4_action()), DuplicateNode);
  // bottom must be trivial unless relaxed
  std::vector<SubgroupNode> no_trivial{SubgroupNode{0, finite_subgroup(t, {6}, "c"), "c", 0},
                                       SubgroupNode{1, finite_subgroup(t, {5}, "d"), "d", 0}};
  EXPECT_THROW(Lattice(no_trivial, d4_action()), InvalidLattice);
  EXPECT_NO_THROW(Lattice(no_trivial, d4_action(), {}, {}, LatticeOptions{false}));
}

TEST(LatticeValidation, GeneratedByFiniteNodes) {
  Lattice lat = d4_lattice();
  EXPECT_TRUE(lat.generated_by(6, {1, 2}));
  EXPECT_TRUE(lat.generated_by(6, {1, 2, 3}));
  EXPECT_FALSE(lat.generated_by(7, {3}));
  EXPECT_TRUE(lat.generated_by(9, {6, 7}));
}

TEST(ImageAction, D4OnPixelGrid) {
  for (std::size_t side : {1u, 2u, 3u, 4u}) {
    GroupAction a = d4_image_action(side);
    EXPECT_EQ(a.dim, side * side);
  }
  GroupAction a = d4_image_action(2);
  // quarter turn of a 2x2 image [[1,2],[3,4]]
  auto t = FiniteGroup::square_symmetries();
  Vector img{1, 2, 3, 4};
  auto r = act(a, make_finite(t, *t->index_of("R_pi/2")), img);
  EXPECT_EQ(r, (Vector{2, 4, 1, 3}));
}
