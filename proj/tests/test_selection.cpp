#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "reqclust/selection.hpp"
#include "support.hpp"

using namespace reqclust;

namespace {

ProblemInstance simple_problem(std::vector<double> effort, std::vector<double> sat, std::vector<Dependency> deps = {}) {
  ProblemInstance p;
  for (std::size_t i = 0; i < effort.size(); ++i) p.requirements.push_back({"r" + std::to_string(i + 1), "", effort[i]});
  p.satisfaction = std::move(sat);
  p.satisfaction_supplied = true;
  p.dependencies = std::move(deps);
  return make_problem(std::move(p));
}

ProblemInstance random_problem(Rng& rng, std::size_t n, std::size_t m) {
  std::vector<Dependency> deps;
  std::set<std::tuple<int, std::string, std::string>> seen;
  while (deps.size() < m) {
    const auto a = rng.index(n), b = rng.index(n);
    if (a == b) continue;
    const std::string ia = "r" + std::to_string(a + 1), ib = "r" + std::to_string(b + 1);
    const auto kind = rng.uniform() < 0.7 ? DependencyKind::implication : DependencyKind::combination;
    const auto lo = std::min(ia, ib), hi = std::max(ia, ib);
    const auto key = kind == DependencyKind::implication ? std::tuple(0, ia, ib) : std::tuple(1, lo, hi);
    if (!seen.insert(key).second) continue;
    deps.push_back({kind, ia, ib});
  }
  return simple_problem(std::vector<double>(n, 1.0), std::vector<double>(n, 1.0), deps);
}

std::set<std::string> as_set(const ProblemInstance& p, const Selection& s) {
  const auto ids = ids_of(p, s);
  return {ids.begin(), ids.end()};
}

ReleasePlan nrp20_plan(const ProblemInstance& p, int k) {
  const auto f = standardize(p);
  const Partition part = pam(f.standardized, k);
  return build_plan(p, part, map_moscow(part, f));
}

}  // namespace

TEST_CASE("MoSCoW categories follow the centroid quadrants") {
  FeatureMatrix f;
  f.standardized.resize(8, 2);
  // Columns are (effort_z, satisfaction_z); each cluster is a pair around its centroid.
  const double centers[4][2] = {{-1, 1}, {1, 1}, {-1, -1}, {1, -1}};
  std::vector<int> labels;
  for (int c = 0; c < 4; ++c)
    for (int s : {-1, 1}) {
      f.standardized.row(static_cast<long>(labels.size())) << centers[c][0] + 0.1 * s, centers[c][1];
      labels.push_back(c);
    }
  const Partition part = make_partition(f.standardized, labels, Algorithm::kmeans);
  const auto m = map_moscow(part, f);
  CHECK(m.category_of == std::vector<Category>{Category::must, Category::should, Category::could, Category::wont});
  CHECK(m.score_of[0] == doctest::Approx(2.0));
  CHECK(m.must_cluster() == 0);
  CHECK(core_set(m, part) == Selection{0, 1});
}

TEST_CASE("clusters beyond four are Extra") {
  FeatureMatrix f;
  f.standardized.resize(5, 2);
  f.standardized << 0, 5, 0, 4, 0, 3, 0, 2, 0, 1;
  const Partition part = make_partition(f.standardized, {0, 1, 2, 3, 4}, Algorithm::pam);
  const auto m = map_moscow(part, f);
  CHECK(m.category_of.back() == Category::extra);
  CHECK(to_string(Category::extra) == "Extra");
}

TEST_CASE("20-requirement plan at k = 4") {
  const auto p = load_fixture("nrp20.json");
  const auto plan = nrp20_plan(p, 4);
  CHECK(plan.core == std::vector<std::string>{"r1", "r4", "r8", "r9", "r10", "r11", "r14", "r15"});
  CHECK(plan.added_by_closure == std::vector<std::string>{"r13"});
  CHECK(plan.core_totals.effort == 15.0);
  CHECK(plan.core_totals.satisfaction == 413.0);
  CHECK(plan.viable_totals.effort == 23.0);
  CHECK(plan.viable_totals.satisfaction == 448.0);
  CHECK(plan.coverage.core_effort == doctest::Approx(17.65).epsilon(1e-3));
  CHECK(plan.coverage.core_satisfaction == doctest::Approx(46.25).epsilon(1e-3));
  CHECK(plan.coverage.viable_effort == doctest::Approx(27.06).epsilon(1e-3));
  CHECK(plan.relative_increase_effort == doctest::Approx(53.33).epsilon(1e-3));
  CHECK(plan.relative_increase_satisfaction == doctest::Approx(8.47).epsilon(1e-3));
  CHECK(plan.conflicts.empty());
}

TEST_CASE("20-requirement plan at k = 3") {
  const auto p = load_fixture("nrp20.json");
  const auto plan = nrp20_plan(p, 3);
  CHECK(plan.core_totals.effort == 35.0);
  CHECK(plan.core_totals.satisfaction == 638.0);
  CHECK(plan.added_by_closure == std::vector<std::string>{"r3", "r13"});
  CHECK(plan.viable_totals.effort == 45.0);
  CHECK(plan.viable_totals.satisfaction == 702.0);
}

TEST_CASE("closure matches the rescan oracle and is idempotent") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.index(12);
    const auto p = random_problem(rng, n, rng.index(2 * n));
    Selection seed;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.uniform() < 0.3) seed.push_back(i);
    const auto c = close_dependencies(seed, p);
    const auto expected = oracle::closure(as_set(p, seed), p);
    CHECK(as_set(p, c.viable) == expected);
    CHECK(close_dependencies(c.viable, p).viable == c.viable);
    CHECK(close_dependencies(c.viable, p).added.empty());
  }
}

TEST_CASE("blocked requirements surface as conflicts") {
  const auto p = simple_problem({1, 1, 1, 1}, {1, 1, 1, 1},
                                {{DependencyKind::implication, "r1", "r2"},
                                 {DependencyKind::combination, "r3", "r4"},
                                 {DependencyKind::exclusion, "r2", "r3"}});
  std::vector<bool> blocked{true, false, false, true};
  const auto c = close_dependencies({1, 2}, p, &blocked);
  CHECK(ids_of(p, c.viable) == std::vector<std::string>{"r2", "r3"});
  REQUIRE(c.conflicts.size() == 3);
  CHECK(c.conflicts[0].dependency.kind == DependencyKind::implication);
  CHECK(c.conflicts[0].reason == "forced_out");
  CHECK(c.conflicts[1].dependency.kind == DependencyKind::combination);
  CHECK(c.conflicts[1].reason == "forced_out");
  CHECK(c.conflicts[2].reason == "both_selected");
}

TEST_CASE("adjusted totals add pairwise deltas") {
  auto raw = simple_problem({2, 3}, {3, 4});
  raw.interactions.delta_s[{"r1", "r2"}] = 2.0;
  raw.interactions.delta_e[{"r1", "r2"}] = -1.0;
  const auto p = make_problem(raw);
  const auto t = adjusted_totals({0, 1}, p);
  CHECK(t.satisfaction == 9.0);
  CHECK(t.effort == 4.0);
  CHECK(adjusted_totals({0}, p).satisfaction == 3.0);

  raw.interactions.delta_e[{"r1", "r2"}] = -10.0;
  CHECK_FALSE(adjusted_totals({0, 1}, make_problem(raw)).warnings.empty());
}

TEST_CASE("full selection covers everything and respects budgets") {
  const auto p = simple_problem({1, 2, 3}, {5, 5, 5});
  const Selection all{0, 1, 2};
  const auto plan = make_plan(p, all, close_dependencies(all, p));
  CHECK(plan.coverage.viable_effort == 100.0);
  CHECK(plan.coverage.viable_satisfaction == 100.0);
  CHECK(plan.relative_increase_effort == 0.0);
  CHECK_FALSE(plan.within_budget.has_value());
  CHECK(*make_plan(p, all, close_dependencies(all, p), 6.0).within_budget);
  CHECK_FALSE(*make_plan(p, all, close_dependencies(all, p), 5.9).within_budget);

  const auto empty = make_plan(p, {}, close_dependencies({}, p));
  CHECK(empty.relative_increase_effort == 0.0);
  CHECK(empty.coverage.core_effort == 0.0);
}

TEST_CASE("plans are invariant to rescaling efforts") {
  auto p = load_fixture("nrp20.json");
  auto scaled = p;
  for (auto& r : scaled.requirements) r.effort *= 1000.0;
  scaled = make_problem(scaled);
  for (int k : {3, 4}) {
    const auto a = nrp20_plan(p, k), b = nrp20_plan(scaled, k);
    CHECK(a.core == b.core);
    CHECK(a.viable == b.viable);
    CHECK(a.coverage.viable_effort == doctest::Approx(b.coverage.viable_effort).epsilon(1e-9));
  }
}
