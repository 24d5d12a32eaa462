// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Usage: acceptance [--jobs N] [--property-suite PATH]

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <boost/multiprecision/cpp_int.hpp>

#include "symlat/binomial.hpp"
#include "symlat/experiments/runners.hpp"
#include "symlat/kdtree.hpp"
#include "symlat/lattice_builders.hpp"
#include "symlat/search.hpp"

using namespace symlat;
using namespace symlat::experiments;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::size_t g_jobs = 1;
std::string g_property_suite;

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// 1. Subgroups of D4 by exhaustive subset enumeration of the Cayley table.
Verdict lattice_exactness() {
  const auto table = FiniteGroup::square_symmetries();
  const std::size_t n = table->order();
  std::vector<unsigned> subgroups;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (!(mask & (1u << table->identity()))) continue;
    bool closed = true;
    for (std::size_t a = 0; a < n && closed; ++a)
      for (std::size_t b = 0; b < n && closed; ++b)
        if ((mask >> a & 1u) && (mask >> b & 1u)) closed = mask >> table->product(a, b) & 1u;
    if (closed) subgroups.push_back(mask);
  }
  std::set<std::pair<unsigned, unsigned>> brute_covers;
  for (unsigned a : subgroups)
    for (unsigned b : subgroups) {
      if (a == b || (a & b) != a) continue;
      bool cover = true;
      for (unsigned c : subgroups)
        if (c != a && c != b && (a & c) == a && (c & b) == c) cover = false;
      if (cover) brute_covers.insert({a, b});
    }

  const Lattice lat = d4_lattice();
  std::map<NodeId, unsigned> mask_of;
  for (const auto& node : lat.nodes()) {
    unsigned m = 0;
    for (std::size_t k : node.group.members) m |= 1u << k;
    mask_of[node.id] = m;
  }
  std::set<unsigned> built;
  for (const auto& [id, m] : mask_of) built.insert(m);
  std::set<std::pair<unsigned, unsigned>> built_covers;
  for (auto [lo, hi] : lat.covers()) built_covers.insert({mask_of[lo], mask_of[hi]});

  const bool same_nodes = built == std::set<unsigned>(subgroups.begin(), subgroups.end());
  const bool pass = subgroups.size() == 10 && lat.size() == 10 && same_nodes && built_covers == brute_covers;
  return {pass, std::to_string(lat.size()) + " nodes vs " + std::to_string(subgroups.size()) + " brute force, " +
                    std::to_string(built_covers.size()) + " covers vs " + std::to_string(brute_covers.size())};
}

// 2. Every algorithm recovers every G_max under a perfect oracle.
Verdict oracle_exactness() {
  std::vector<std::pair<std::string, Lattice>> lattices;
  lattices.emplace_back("D4", d4_lattice());
  lattices.emplace_back("C1<C2", cyclic_chain_lattice({1, 2}));
  lattices.emplace_back("C1<C2<C4", cyclic_chain_lattice({1, 2, 4}));
  lattices.emplace_back("C1<C2<C4<C8", cyclic_chain_lattice({1, 2, 4, 8}));
  lattices.emplace_back("SO(3) axes", so3_axes_lattice(icosahedral_axes()));
  lattices.emplace_back("SL(3) extended", sl3_extended_lattice());
  std::size_t runs = 0, failures = 0;
  std::string first_failure;
  for (const auto& [name, lat] : lattices)
    for (NodeId gmax : lat.ids())
      for (auto algorithm : {SearchAlgorithm::Breadth, SearchAlgorithm::BreadthGreedy, SearchAlgorithm::Depth}) {
        SearchConfig cfg;
        cfg.algorithm = algorithm;
        ++runs;
        if (run_search(lat, oracle_tester(lat, gmax), cfg).estimate != gmax) {
          if (failures++ == 0) first_failure = name + " gmax " + lat.node(gmax).label + " " + to_string(algorithm);
        }
      }
  return {failures == 0, std::to_string(runs) + " searches, " + std::to_string(failures) + " wrong" +
                             (failures ? " (first: " + first_failure + ")" : "")};
}

// 3. Greedy skips the top of C2 x C2 under an all-accept oracle.
Verdict greedy_savings() {
  const Lattice lat = klein_lattice();
  SearchConfig cfg;
  cfg.algorithm = SearchAlgorithm::BreadthGreedy;
  const auto greedy = run_search(lat, scripted_tester({}), cfg);
  cfg.algorithm = SearchAlgorithm::Breadth;
  const auto plain = run_search(lat, scripted_tester({}), cfg);
  const bool top_untested =
      std::find(greedy.test_order.begin(), greedy.test_order.end(), lat.top()) == greedy.test_order.end();
  const std::size_t saved = plain.computation_units - greedy.computation_units;
  return {top_untested && saved >= 4 && greedy.estimate == lat.top(),
          std::string("top ") + (top_untested ? "untested" : "tested") + ", units " +
              std::to_string(greedy.computation_units) + " vs " + std::to_string(plain.computation_units) +
              " breadth-first, saved " + std::to_string(saved)};
}

// 4. Binomial tails against exact rationals; k-d tree against a linear scan.
Verdict numerical_oracles() {
  double worst = 0;
  for (unsigned m = 0; m <= 50; ++m)
    for (unsigned tenth = 0; tenth <= 10; ++tenth) {
      const cpp_rational p(tenth, 10), q = 1 - p;
      std::vector<cpp_rational> term(m + 1);
      cpp_int choose = 1;
      for (unsigned j = 0; j <= m; ++j) {
        if (j > 0) choose = choose * (m - j + 1) / j;
        cpp_rational t = choose;
        for (unsigned a = 0; a < j; ++a) t *= p;
        for (unsigned a = j; a < m; ++a) t *= q;
        term[j] = t;
      }
      cpp_rational tail = 0;
      for (unsigned k = m + 1; k-- > 0;) {
        tail += term[k];
        const double exact = static_cast<double>(tail);
        const double got = binom_tail(m, k, tenth / 10.0);
        const double rel = exact == 0 ? std::abs(got) : std::abs(got - exact) / exact;
        worst = std::max(worst, rel);
      }
    }

  Rng rng = make_rng(4);
  constexpr std::size_t n = 1000, d = 5;
  std::vector<double> pts(n * d);
  for (auto& v : pts) v = standard_normal(rng);
  const NeighborIndex index(pts, d);
  std::size_t mismatches = 0;
  for (std::size_t t = 0; t < 2000; ++t) {
    std::vector<double> q(d);
    if (t < n) {
      std::copy_n(pts.begin() + t * d, d, q.begin());
    } else {
      for (auto& v : q) v = 1.5 * standard_normal(rng);
    }
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) s += (q[k] - pts[i * d + k]) * (q[k] - pts[i * d + k]);
      if (s < best_d2) best_d2 = s, best = i;
    }
    mismatches += index.nearest(q) != best;
  }
  return {worst <= 1e-12 && mismatches == 0,
          "max relative binomial error " + fmt(worst) + ", " + std::to_string(mismatches) + "/2000 neighbour mismatches"};
}

double rate_of(const CsvTable& t, const std::string& test, const std::string& hypothesis) {
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.rows[r][0] == test && t.rows[r][1] == hypothesis) return t.number(r, "rejection_rate");
  return std::numeric_limits<double>::quiet_NaN();
}

// 5. Power and size of both tests at n = 300.
Verdict power_and_size() {
  auto cfg = parse_experiment("[experiment]\nkind = power-curve\nsizes = 300\nreplicates = 100\nseed = 1\n");
  const auto t = read_csv_table(run_power_curve(cfg, {g_jobs, OutputFormat::Csv}).file("power_curve.csv"));
  const double ap = rate_of(t, "asym", "non-invariant"), as = rate_of(t, "asym", "invariant");
  const double pp = rate_of(t, "perm", "non-invariant"), ps = rate_of(t, "perm", "invariant");
  const bool pass = ap >= 0.95 && as <= 0.12 && pp >= 0.90 && ps <= 0.15;
  return {pass, "asym power " + fmt(ap) + " size " + fmt(as) + ", perm power " + fmt(pp) + " size " + fmt(ps)};
}

// 6. Group recovery for f2 at n = 300 and f4 at small n.
Verdict group_recovery() {
  auto f2 = parse_experiment("[experiment]\nkind = group-recovery\ndim = 2\nsizes = 300\nreplicates = 100\n");
  auto f4 = parse_experiment("[experiment]\nkind = group-recovery\ndim = 4\nsizes = 20, 30\nreplicates = 100\n");
  f2.test.types = f4.test.types = {"asym"};
  const auto t2 = read_csv_table(run_group_recovery(f2, {g_jobs, OutputFormat::Csv}).file("group_recovery.csv"));
  const auto t4 = read_csv_table(run_group_recovery(f4, {g_jobs, OutputFormat::Csv}).file("group_recovery.csv"));
  const double c2 = t2.number(0, "prop_C2");
  bool pass = c2 >= 0.8;
  std::string detail = "f2 n=300 prop C2 " + fmt(c2);
  for (std::size_t r = 0; r < t4.rows.size(); ++r) {
    const double i = t4.number(r, "prop_I"), p2 = t4.number(r, "prop_C2"), p4 = t4.number(r, "prop_C4");
    pass = pass && p4 > i && p4 > p2;
    detail += "; f4 n=" + t4.rows[r][1] + " I/C2/C4 " + fmt(i) + "/" + fmt(p2) + "/" + fmt(p4);
  }
  return {pass, detail};
}

// 7. Estimator ordering on extrapolation scenarios 1 and 3.
Verdict estimator_ordering() {
  auto mean_ratio = [](const std::string& scenario) {
    auto cfg = parse_experiment("[experiment]\nkind = estimator-comparison\nscenario = " + scenario +
                                "\nsizes = 200\nreplicates = 100\n");
    const auto m = read_csv_table(run_estimator_comparison(cfg, {g_jobs, OutputFormat::Csv}).file("estimator_means.csv"));
    return std::pair{m.number(0, "mean_mspe_A"), m.number(0, "mean_mspe_B")};
  };
  const auto [a1, b1] = mean_ratio("extrapolation-1");
  const auto [a3, b3] = mean_ratio("extrapolation-3");
  const double r1 = b1 / a1, r3 = b3 / a3;
  return {r1 <= 0.5 && r3 >= 0.8 && r3 <= 1.25,
          "scenario 1 B/A " + fmt(r1) + " (A " + fmt(a1) + "), scenario 3 B/A " + fmt(r3)};
}

// 8. The property suite as a separate process.
Verdict property_suites() {
  if (g_property_suite.empty() || !std::filesystem::exists(g_property_suite))
    return {false, "property suite binary not found at '" + g_property_suite + "'"};
  const auto start = std::chrono::steady_clock::now();
  const std::string cmd = "\"" + g_property_suite + "\" --gtest_brief=1 > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {status == 0 && secs <= 300, std::string("exit ") + std::to_string(status) + " in " + fmt(secs) + " s"};
}

// 9. Batch testing of the whole group reproduces the direct test.
Verdict batch_equivalence() {
  const GroupAction action = cyclic_rotation_action(4, 2);
  Rng rng = make_rng(9);
  const auto data = generate(finite_scenario(2, 0.05), 300, rng);
  const NeighborIndex index(data);
  const SamplerSpec shared = default_sampler(action.group);
  AsymTestConfig asym{HolderBound{std::exp(-1.0), 1.0}, GaussianNoise{0.05}, {0.1}, 0, 0.05};
  PermTestConfig perm;
  bool pass = true;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const TestConfig& cfg : {TestConfig{asym}, TestConfig{perm}}) {
      const auto batch = batch_test(data, index, action, {action.group}, shared, cfg, seed).front();
      const auto direct = run_test(data, index, action, shared, cfg, seed);
      pass = pass && batch.p_value == direct.p_value && batch.decision == direct.decision &&
             batch.counts == direct.counts && batch.replicate_quantiles == direct.replicate_quantiles &&
             (std::isnan(batch.a0) ? std::isnan(direct.a0) : batch.a0 == direct.a0);
    }
  }
  return {pass, pass ? "asym and perm outcomes identical for 3 seeds" : "outcomes differ"};
}

}  // namespace

int main(int argc, char** argv) {
  g_jobs = std::max(1u, std::thread::hardware_concurrency());
  g_property_suite = (std::filesystem::path(argv[0]).parent_path() / "property_suite").string();
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--jobs") g_jobs = std::stoul(argv[i + 1]);
    else if (flag == "--property-suite") g_property_suite = argv[i + 1];
  }

  const std::vector<std::pair<std::string, Verdict (*)()>> criteria{
      {"lattice exactness", lattice_exactness},   {"oracle search exactness", oracle_exactness},
      {"greedy savings", greedy_savings},         {"numerical oracles", numerical_oracles},
      {"power and size", power_and_size},         {"group recovery", group_recovery},
      {"estimator ordering", estimator_ordering}, {"property suites", property_suites},
      {"batch equivalence", batch_equivalence}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " " << criteria[k].first << ": " << v.detail
              << " [" << fmt(secs, 2) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
