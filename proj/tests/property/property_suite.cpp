#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "symlat/experiments/runners.hpp"
#include "symlat/lattice_builders.hpp"
#include "symlat/regression.hpp"

using namespace symlat;
using namespace symlat::experiments;

namespace {

constexpr int kPairs = 100;

Vector normal_vector(Rng& rng, std::size_t d, double sd = 1.0) {
  Vector x(d);
  for (auto& v : x) v = sd * standard_normal(rng);
  return x;
}

Vector3 unit_vector(Rng& rng) {
  Vector3 v;
  do {
    v = Vector3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

double max_diff(const Vector& a, const Vector& b) {
  EXPECT_EQ(a.size(), b.size());
  double m = 0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

void expect_table_axioms(const FiniteGroup& g) {
  const std::size_t n = g.order(), e = g.identity();
  for (std::size_t a = 0; a < n; ++a) {
    EXPECT_EQ(g.product(a, e), a);
    EXPECT_EQ(g.product(e, a), a);
    EXPECT_EQ(g.product(a, g.inverse(a)), e);
    EXPECT_EQ(g.product(g.inverse(a), a), e);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) EXPECT_EQ(g.product(g.product(a, b), c), g.product(a, g.product(b, c)));
  }
}

void expect_element_axioms(const std::vector<GroupElement>& elems) {
  for (std::size_t k = 0; k + 2 < elems.size(); ++k) {
    const auto &a = elems[k], &b = elems[k + 1], &c = elems[k + 2];
    EXPECT_TRUE(approx_equal(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-9));
    EXPECT_TRUE(is_identity(compose(a, inverse(a)), 1e-9));
    EXPECT_TRUE(is_identity(compose(inverse(a), a), 1e-9));
    EXPECT_TRUE(approx_equal(compose(a, identity_like(a)), a, 1e-12));
  }
}

// (g h) x = g (h x) for sampled pairs.
void expect_compatible(const GroupAction& action, const SamplerSpec& sampler, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  for (int k = 0; k < kPairs; ++k) {
    const GroupElement g = sample(sampler, rng), h = sample(sampler, rng);
    const Vector x = normal_vector(rng, action.dim);
    const Vector lhs = act(action, compose(g, h), x);
    const Vector hx = act(action, h, x);
    EXPECT_LE(max_diff(lhs, act(action, g, hx)), 1e-9) << to_string(action.kind);
  }
}

std::vector<GroupElement> table_elements(const GroupAction& action) {
  std::vector<GroupElement> out;
  for (std::size_t k : action.group.members) out.push_back(make_finite(action.group.table, k));
  return out;
}

void expect_projection_invariant(const ProjectionMap& p, const std::function<GroupElement(Rng&)>& draw_g,
                                 std::size_t d, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  for (int k = 0; k < kPairs; ++k) {
    const GroupElement g = draw_g(rng);
    const Vector x = normal_vector(rng, d);
    Vector gx(d);
    apply_concrete(g, x, gx);
    EXPECT_LE(max_diff(project_point(p, x), project_point(p, gx)), 1e-9) << projection_name(p);
  }
}

}  // namespace

TEST(GroupAxioms, CayleyTables) {
  expect_table_axioms(*FiniteGroup::square_symmetries());
  expect_table_axioms(*FiniteGroup::cyclic(12));
  expect_table_axioms(*FiniteGroup::dihedral(6));
  expect_table_axioms(*klein_action().group.table);
  expect_table_axioms(*FiniteGroup::from_permutations({{1, 2, 0, 3}, {1, 0, 2, 3}}));
}

TEST(GroupAxioms, ContinuousElements) {
  Rng rng = make_rng(11);
  std::vector<GroupElement> rot, sl3, axis, planar, shift, perm;
  for (int k = 0; k < 30; ++k) {
    rot.push_back(sample(SamplerSpec{HaarSO3{}}, rng));
    sl3.push_back(sample(SamplerSpec{RandomSL3{}}, rng));
    axis.push_back(make_axis_rotation(Vector3(0.0, 0.6, 0.8), uniform_real(rng, 0.0, 7.0)));
    planar.push_back(make_planar(uniform_real(rng, 0.0, 7.0), 0, 2, k % 2 == 0));
    shift.push_back(make_translation(normal_vector(rng, 4)));
    perm.push_back(make_permutation({static_cast<std::size_t>(k % 3), static_cast<std::size_t>((k + 1) % 3),
                                     static_cast<std::size_t>((k + 2) % 3)}));
  }
  for (const auto* set : {&rot, &sl3, &axis, &planar, &shift, &perm}) expect_element_axioms(*set);
}

TEST(ActionCompatibility, FiniteActions) {
  for (const auto& action : {d4_action(), d4_action(3), cyclic_rotation_action(8), cyclic_rotation_action(4, 4, 2),
                             klein_action(), d4_image_action(3)})
    expect_compatible(action, uniform_over(table_elements(action)), 21);
}

TEST(ActionCompatibility, MatrixActions) {
  expect_compatible(matrix_action(so3_group()), SamplerSpec{HaarSO3{}}, 22);
  expect_compatible(matrix_action(sl3_group()), SamplerSpec{RandomSL3{}}, 23);
  const auto s1 = circle_about_axis(Vector3(1, 1, 1).normalized(), "S1");
  expect_compatible(matrix_action(s1), default_sampler(s1), 24);
}

TEST(ProjectionInvariance, EveryMapType) {
  expect_projection_invariant(IdentityProjection{}, [](Rng&) { return GroupElement{make_planar(0.0)}; }, 3, 31);
  expect_projection_invariant(RadialProjection{}, [](Rng& r) { return sample(SamplerSpec{HaarSO3{}}, r); }, 3, 32);
  expect_projection_invariant(NonzeroIndicator{}, [](Rng& r) { return sample(SamplerSpec{RandomSL3{}}, r); }, 3, 33);
  Rng axis_rng = make_rng(34);
  const Vector3 u = unit_vector(axis_rng);
  expect_projection_invariant(
      AxisColatitude{u}, [&](Rng& r) { return make_axis_rotation(u, uniform_real(r, 0.0, 7.0)); }, 3, 35);
  expect_projection_invariant(
      PlanarRadius{0, 2}, [](Rng& r) { return make_planar(uniform_real(r, 0.0, 7.0), 0, 2); }, 4, 36);
  const auto images = square_symmetry_images();
  expect_projection_invariant(
      OrbitCanonical{images}, [&](Rng& r) { return images[uniform_index(r, images.size())]; }, 2, 37);
  const Vector v1{1.0, -2.0, 0.5, 0.0}, v2{0.0, 1.0, 1.0, 3.0};
  expect_projection_invariant(
      complement_of({v1, v2}, 4),
      [&](Rng& r) {
        const double a = 3 * standard_normal(r), b = 3 * standard_normal(r);
        Vector s(4);
        for (std::size_t k = 0; k < 4; ++k) s[k] = a * v1[k] + b * v2[k];
        return make_translation(s);
      },
      4, 38);
}

TEST(ProjectionInvariance, LatticeNodeProjections) {
  const Lattice lat = sl3_extended_lattice();
  Rng rng = make_rng(41);
  for (const auto& node : lat.nodes()) {
    if (node.group.is_trivial()) continue;
    const ProjectionMap p = projection_for(node.group, lat.ambient());
    const SamplerSpec s = default_sampler(node.group);
    for (int k = 0; k < kPairs; ++k) {
      const GroupElement g = sample(s, rng);
      const Vector x = normal_vector(rng, 3);
      EXPECT_LE(max_diff(project_point(p, x), project_point(p, act(lat.ambient(), g, x))), 1e-9) << node.label;
    }
  }
}

TEST(SymmetrizedPredictor, InvariantUnderEstimatedGroup) {
  const Scenario s = extrapolation_scenario(1);
  Rng rng = make_rng(51);
  const auto train = generate(s, 200, rng);
  const Lattice lat = sl3_extended_lattice();
  ExperimentConfig cfg = parse_experiment("[experiment]\nkind = estimator-comparison\n");
  const auto fit = symmetrized_estimator(train, lat, build_test_config(cfg.test, "asym"), SearchConfig{},
                                         SymmetrizedVariant::FullData);
  const auto& g_hat = lat.node(fit.search.estimate).group;
  EXPECT_FALSE(g_hat.is_trivial());
  const SamplerSpec sampler = default_sampler(g_hat);
  for (int k = 0; k < kPairs; ++k) {
    const Vector x = normal_vector(rng, 3, std::sqrt(2.0));
    const Vector gx = act(lat.ambient(), sample(sampler, rng), x);
    EXPECT_NEAR(fit.regressor.predict(x), fit.regressor.predict(gx), 1e-9);
  }
}

TEST(SymmetrizedPredictor, FiniteNodesAndFeatureAveraging) {
  const Lattice lat = d4_lattice();
  Rng rng = make_rng(52);
  const auto train = generate(finite_scenario(2, 0.05), 150, rng);
  const auto plain = plain_estimator(train);
  for (const auto& node : lat.nodes()) {
    const auto action = finite_action(node.group, 2, square_symmetry_images());
    const auto fit = projected_estimator(train, projection_for(node.group, action), node.id, node.label);
    const auto avg = feature_average(plain.predictor(), action);
    const auto maps = table_elements(action);
    for (int k = 0; k < 20; ++k) {
      const Vector x = normal_vector(rng, 2, 2.0);
      const Vector gx = act(action, maps[uniform_index(rng, maps.size())], x);
      EXPECT_NEAR(fit.predict(x), fit.predict(gx), 1e-9) << node.label;
      EXPECT_NEAR(avg(x), avg(gx), 1e-9) << node.label;
    }
  }
}

TEST(DeterministicSeeding, RunnersProduceIdenticalCsv) {
  auto power = parse_experiment("[experiment]\nkind = power-curve\nsizes = 40, 80\nreplicates = 4\n[test]\nB = 20\n");
  EXPECT_EQ(run_power_curve(power, {1, OutputFormat::Csv}).file("power_curve.csv"),
            run_power_curve(power, {4, OutputFormat::Csv}).file("power_curve.csv"));
  auto recovery = parse_experiment(
      "[experiment]\nkind = group-recovery\ndim = 4\nsizes = 20, 60\nreplicates = 4\n[test]\nB = 20\n");
  EXPECT_EQ(run_group_recovery(recovery, {1, OutputFormat::Csv}).file("group_recovery.csv"),
            run_group_recovery(recovery, {3, OutputFormat::Csv}).file("group_recovery.csv"));
  auto compare = parse_experiment(
      "[experiment]\nkind = estimator-comparison\nscenario = extrapolation-2\nsizes = 40\nreplicates = 2\n");
  EXPECT_EQ(run_estimator_comparison(compare, {1, OutputFormat::Csv}).file("estimator_comparison.csv"),
            run_estimator_comparison(compare, {2, OutputFormat::Csv}).file("estimator_comparison.csv"));
  auto search = parse_experiment(
      "[experiment]\nkind = single-search\nseed = 8\n[lattice]\nbuilder = d4\n[data]\nsource = scenario\nn = 120\n");
  EXPECT_EQ(run_single_search(search).output.file("search.csv"), run_single_search(search).output.file("search.csv"));
}

TEST(SizeControl, BothTestsUnderNull) {
  constexpr std::size_t kReplicates = 200;
  constexpr double alpha = 0.05;
  const double limit = alpha + 2 * std::sqrt(alpha * (1 - alpha) / kReplicates);
  const Scenario s = finite_scenario(2, 0.05);
  const GroupAction rotate = cyclic_rotation_action(4, 2, 1);
  const GroupAction doubled = with_representation(rotate, cyclic_rotation_action(4, 2, 2).representation);
  const SamplerSpec sampler = default_sampler(rotate.group);

  AsymTestConfig asym;
  asym.bound = HolderBound{std::exp(-1.0), 1.0};
  asym.noise = exact_gaussian_table(0.05, {0.1});
  asym.thresholds = {0.1};
  PermTestConfig perm;

  std::size_t asym_hits = 0, perm_hits = 0;
  for (std::size_t r = 0; r < kReplicates; ++r) {
    Rng rng = make_rng(derive_seed(61, r));
    const auto data = generate(s, 200, rng);
    const NeighborIndex index(data);
    asym_hits += run_test(data, index, doubled, sampler, asym, derive_seed(62, r)).rejected();
    perm_hits += run_test(data, index, doubled, sampler, perm, derive_seed(63, r)).rejected();
  }
  EXPECT_LE(static_cast<double>(asym_hits) / kReplicates, limit);
  EXPECT_LE(static_cast<double>(perm_hits) / kReplicates, limit);
}

TEST(Power, GeneratorOnlySampler) {
  const Scenario s = finite_scenario(2, 0.05);
  const GroupAction rotate = cyclic_rotation_action(4, 2, 1);
  const SamplerSpec generator = point_mass(make_finite(rotate.group.table, 1));
  AsymTestConfig asym;
  asym.bound = HolderBound{std::exp(-1.0), 1.0};
  asym.noise = GaussianNoise{0.05};
  asym.thresholds = {0.1};
  std::size_t hits = 0;
  constexpr std::size_t kReplicates = 50;
  for (std::size_t r = 0; r < kReplicates; ++r) {
    Rng rng = make_rng(derive_seed(71, r));
    const auto data = generate(s, 300, rng);
    hits += run_test(data, NeighborIndex(data), rotate, generator, asym, derive_seed(72, r)).rejected();
  }
  EXPECT_GT(static_cast<double>(hits) / kReplicates, 0.9);
}
