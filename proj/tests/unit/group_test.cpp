#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "symlat/group.hpp"
#include "symlat/lattice_builders.hpp"

using namespace symlat;

namespace {

std::size_t d4(const std::string& label) { return *FiniteGroup::square_symmetries()->index_of(label); }

GroupElement d4e(const std::string& label) { return make_finite(FiniteGroup::square_symmetries(), d4(label)); }

}  // namespace

TEST(FiniteGroup, SquareSymmetriesComposeByTable) {
  auto r = compose(d4e("R_pi/2"), d4e("R_pi/2"));
  EXPECT_EQ(std::get<FiniteElement>(r).index, d4("R_pi"));
  for (std::size_t g = 0; g < 8; ++g) {
    auto e = make_finite(FiniteGroup::square_symmetries(), g);
    EXPECT_EQ(std::get<FiniteElement>(compose(e, d4e("I"))).index, g);
  }
}

TEST(FiniteGroup, RejectsInvalidTables) {
  EXPECT_THROW(FiniteGroup({"a", "b"}, {0, 1, 0, 1}), ArgumentError);
  EXPECT_THROW(FiniteGroup({"a", "b"}, {0, 1, 1}), ArgumentError);
  // Latin square without associativity: a loop of order 5
  std::vector<std::size_t> loop{0, 1, 2, 3, 4, 1, 0, 3, 4, 2, 2, 4, 0, 1, 3, 3, 2, 4, 0, 1, 4, 3, 1, 2, 0};
  EXPECT_THROW(FiniteGroup({"e", "a", "b", "c", "d"}, loop), ArgumentError);
}

TEST(FiniteGroup, ClosureAndOrders) {
  auto t = FiniteGroup::square_symmetries();
  std::vector<std::size_t> gens{d4("R_h"), d4("R_v")};
  auto k = t->closure(gens);
  EXPECT_EQ(k, (std::vector<std::size_t>{d4("I"), d4("R_h"), d4("R_v"), d4("R_pi")}));
  EXPECT_EQ(FiniteGroup::dihedral(4)->order(), 8u);
  EXPECT_EQ(FiniteGroup::direct_product(*FiniteGroup::cyclic(2), *FiniteGroup::cyclic(3))->order(), 6u);
  auto s3 = FiniteGroup::from_permutations({{1, 0, 2}, {1, 2, 0}});
  EXPECT_EQ(s3->order(), 6u);
}

TEST(GroupElement, RotationInverseComposesToIdentity) {
  Vector3 u(1, 2, 3);
  auto a = make_axis_rotation(u, 0.7);
  auto b = make_axis_rotation(u, -0.7);
  auto c = compose(a, b);
  ASSERT_TRUE(std::holds_alternative<RotationMatrix>(c));
  EXPECT_LE((std::get<RotationMatrix>(c).m - Matrix3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_TRUE(is_identity(compose(a, inverse(a))));
}

TEST(GroupElement, KindMismatchThrows) {
  EXPECT_THROW(compose(make_planar(1.0), make_axis_rotation(Vector3::UnitZ(), 1.0)), IncompatibleElements);
  EXPECT_THROW(compose(d4e("R_h"), make_finite(FiniteGroup::cyclic(4), 1)), IncompatibleElements);
  EXPECT_THROW(compose(make_planar(1.0, 0, 1), make_planar(1.0, 0, 2)), IncompatibleElements);
}

TEST(GroupElement, ConstructorsValidate) {
  EXPECT_THROW(make_permutation({0, 0, 1}), ArgumentError);
  EXPECT_THROW(make_axis_rotation(Vector3::Zero(), 1.0), ArgumentError);
  Matrix3 m = Matrix3::Identity();
  m(0, 0) = 2;
  EXPECT_THROW(make_rotation_matrix(m), ArgumentError);
  EXPECT_THROW(make_special_linear(m), ArgumentError);
  m(1, 1) = 0.5;
  EXPECT_NO_THROW(make_special_linear(m));
  auto a = std::get<AxisRotation>(make_axis_rotation(Vector3(3, 0, 4), 1.0));
  EXPECT_NEAR(a.axis.norm(), 1.0, 1e-12);
}

TEST(GroupElement, SpecialLinearStaysUnimodular) {
  Matrix3 m;
  m << 2, 1, 0, 0, 0.5, 0, 0, 0, 1;
  GroupElement g = make_special_linear(m);
  GroupElement acc = g;
  for (int k = 0; k < 50; ++k) acc = compose(acc, k % 2 ? g : inverse(g));
  EXPECT_NEAR(std::get<SpecialLinear>(acc).m.determinant(), 1.0, 1e-9);
}

TEST(Act, PlanarRotationOfCoordinates) {
  auto action = trivial_action(trivial_group(), 4);
  action.kind = ActionKind::PlanarRotation;
  Vector x{1, 0, 0, 0};
  auto y = act(action, make_planar(std::numbers::pi / 2, 0, 1), x);
  EXPECT_NEAR(y[0], 0.0, 1e-15);
  EXPECT_NEAR(y[1], 1.0, 1e-15);
  EXPECT_EQ(y[2], 0.0);
  EXPECT_EQ(y[3], 0.0);
}

TEST(Act, CoordinatePermutationIsExact) {
  auto action = trivial_action(trivial_group(), 3);
  action.kind = ActionKind::CoordinatePermutation;
  Vector x{1.5, -2.25, 3.0};
  auto y = act(action, make_permutation({1, 0, 2}), x);
  EXPECT_EQ(y, (Vector{-2.25, 1.5, 3.0}));
}

TEST(Act, TranslationIsExact) {
  auto action = trivial_action(translation_group({{1, 0}}, "T"), 2);
  action.kind = ActionKind::Translation;
  auto y = act(action, make_translation({0.5, -1.0}), Vector{1.0, 1.0});
  EXPECT_EQ(y, (Vector{1.5, 0.0}));
}

TEST(Act, StarActionIsSquareOfDotAction) {
  const std::size_t d = 5;
  GroupAction dot = cyclic_rotation_action(4, d, 1);
  GroupAction star = cyclic_rotation_action(4, d, 2);
  Vector x{0.3, -1.2, 0.7, 2.0, -0.4};
  for (std::size_t k = 0; k < 4; ++k) {
    auto g = make_finite(dot.group.table, k);
    auto lhs = act(star, make_finite(star.group.table, k), x);
    auto rhs = act(dot, compose(g, g), x);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-12);
  }
  auto y = act(star, make_finite(star.group.table, 1), x);
  EXPECT_NEAR(y[0], -x[0], 1e-12);
  EXPECT_NEAR(y[1], -x[1], 1e-12);
  EXPECT_EQ(y[2], x[2]);
}

TEST(Act, DimensionMismatch) {
  auto action = d4_action(2);
  EXPECT_THROW(act(action, d4e("R_h"), Vector{1, 2, 3}), DimensionMismatch);
}

TEST(Act, FiniteActionRejectsNonHomomorphism) {
  auto images = square_symmetry_images();
  std::swap(images[1], images[2]);
  std::swap(images[5], images[7]);
  images[3] = make_planar(0.0, 0, 1, true);
  EXPECT_THROW(finite_action(whole_group(FiniteGroup::square_symmetries(), "D4"), 2, images), ArgumentError);
}

TEST(Sample, PointMassAlwaysReturnsElement) {
  Rng rng(1);
  auto b = d4e("R_/");
  for (int k = 0; k < 20; ++k) EXPECT_EQ(std::get<FiniteElement>(sample(point_mass(b), rng)).index, d4("R_/"));
}

TEST(Sample, UniformOverRotationsHasEqualFrequencies) {
  auto c4 = FiniteGroup::cyclic(4);
  auto spec = uniform_over({make_finite(c4, 1), make_finite(c4, 2), make_finite(c4, 3)});
  Rng rng(42);
  std::array<int, 4> counts{};
  const int n = 10000;
  for (int k = 0; k < n; ++k) ++counts[std::get<FiniteElement>(sample(spec, rng)).index];
  const double p = 1.0 / 3.0, band = 3 * std::sqrt(n * p * (1 - p));
  EXPECT_EQ(counts[0], 0);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(counts[k], n * p, band);
}

TEST(Sample, GaussianAngleSpread) {
  const double s = kTwoPi * 0.2;
  SamplerSpec spec{GaussianAngle{Vector3::UnitZ(), s}};
  Rng rng(7);
  const int n = 10000;
  double sum = 0, sum2 = 0;
  for (int k = 0; k < n; ++k) {
    double theta = std::get<AxisRotation>(sample(spec, rng)).angle;
    sum += theta;
    sum2 += theta * theta;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
  EXPECT_NEAR(sd, s, 0.05 * s);
}

TEST(Sample, HaarCircleAngleRange) {
  Rng rng(3);
  SamplerSpec spec{HaarCircle{std::nullopt, 0, 1}};
  for (int k = 0; k < 1000; ++k) {
    auto p = std::get<PlanarMap>(sample(spec, rng));
    EXPECT_GE(p.angle, 0.0);
    EXPECT_LT(p.angle, kTwoPi);
  }
}

TEST(Sample, InvalidSpecsRejected) {
  EXPECT_THROW(validate(SamplerSpec{UniformElements{}}), ArgumentError);
  EXPECT_THROW(validate(SamplerSpec{GaussianAngle{Vector3::UnitZ(), 0.0}}), ArgumentError);
  Rng rng(1);
  EXPECT_THROW(sample(SamplerSpec{UniformElements{}}, rng), ArgumentError);
}

TEST(Sample, RandomSpecialLinearHasUnitDeterminant) {
  Rng rng(11);
  SamplerSpec spec{RandomSL3{0.5}};
  for (int k = 0; k < 100; ++k)
    EXPECT_NEAR(std::get<SpecialLinear>(sample(spec, rng)).m.determinant(), 1.0, 1e-9);
}

TEST(ElementsOf, FiniteGroups) {
  EXPECT_EQ(elements_of(whole_group(FiniteGroup::square_symmetries(), "D4")).size(), 8u);
  EXPECT_EQ(elements_of(trivial_group()).size(), 1u);
  EXPECT_TRUE(is_identity(elements_of(trivial_group()).front()));
  EXPECT_EQ(elements_of(whole_group(FiniteGroup::cyclic(4), "C4")).size(), 4u);
  EXPECT_EQ(elements_of(permutation_group({{1, 2, 0}}, "C3")).size(), 3u);
  EXPECT_THROW(elements_of(so3_group()), NotFinite);
  EXPECT_THROW(elements_of(circle_about_axis(Vector3::UnitX(), "S1")), NotFinite);
}

TEST(Contains, PlanarAngleMembershipThroughRepresentation) {
  GroupAction action = cyclic_rotation_action(4, 2);
  GroupDescriptor c2 = finite_subgroup(action.group.table, {2}, "C2");
  EXPECT_TRUE(contains(c2, make_planar(std::numbers::pi + 5e-10), &action));
  EXPECT_FALSE(contains(c2, make_planar(std::numbers::pi / 2), &action));
  EXPECT_TRUE(contains(c2, make_finite(action.group.table, 2)));
  EXPECT_FALSE(contains(c2, make_finite(action.group.table, 1)));
}

TEST(Contains, ContinuousKinds) {
  auto circle = circle_about_axis(Vector3(0, 0, 2), "S1_z");
  EXPECT_TRUE(contains(circle, make_axis_rotation(Vector3::UnitZ(), 0.4)));
  EXPECT_TRUE(contains(circle, RotationMatrix{rotation_about(Vector3::UnitZ(), 2.0)}));
  EXPECT_FALSE(contains(circle, make_axis_rotation(Vector3::UnitX(), 0.4)));
  EXPECT_TRUE(contains(so3_group(), make_axis_rotation(Vector3::UnitX(), 0.4)));
  Matrix3 m = Matrix3::Identity();
  m(0, 0) = 2;
  m(1, 1) = 0.5;
  EXPECT_FALSE(contains(so3_group(), SpecialLinear{m}));
  EXPECT_TRUE(contains(sl3_group(), SpecialLinear{m}));
}
