#include "reqclust/selection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace reqclust {

std::string to_string(Category category) {
  switch (category) {
    case Category::must: return "Must";
    case Category::should: return "Should";
    case Category::could: return "Could";
    case Category::wont: return "Wont";
    case Category::extra: return "Extra";
  }
  return "Extra";
}

MoscowLabeling map_moscow(const Partition& partition, const FeatureMatrix& features) {
  const int k = partition.k;
  const Matrix c = cluster_centroids(features.standardized, partition.labels, k);
  MoscowLabeling m;
  m.score_of.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    m.score_of[static_cast<std::size_t>(i)] = c(i, kSatisfactionColumn) - c(i, kEffortColumn);
  m.ranking.resize(static_cast<std::size_t>(k));
  std::iota(m.ranking.begin(), m.ranking.end(), 0);
  std::sort(m.ranking.begin(), m.ranking.end(), [&](int a, int b) {
    const double sa = m.score_of[static_cast<std::size_t>(a)], sb = m.score_of[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    const double ta = c(a, kSatisfactionColumn), tb = c(b, kSatisfactionColumn);
    if (ta != tb) return ta > tb;
    return a < b;
  });
  m.category_of.assign(static_cast<std::size_t>(k), Category::extra);
  constexpr Category order[] = {Category::must, Category::should, Category::could, Category::wont};
  for (std::size_t r = 0; r < m.ranking.size() && r < 4; ++r)
    m.category_of[static_cast<std::size_t>(m.ranking[r])] = order[r];
  return m;
}

Selection core_set(const MoscowLabeling& labeling, const Partition& partition) {
  Selection s;
  const int must = labeling.must_cluster();
  for (std::size_t i = 0; i < partition.labels.size(); ++i)
    if (partition.labels[i] == must) s.push_back(i);
  return s;
}

Closure close_dependencies(const Selection& seed, const ProblemInstance& problem, const std::vector<bool>* blocked) {
  const std::size_t n = problem.size();
  auto is_blocked = [&](std::size_t i) { return blocked && i < blocked->size() && (*blocked)[i]; };

  // needs[j] = requirements that must accompany j.
  std::vector<std::vector<std::size_t>> needs(n);
  for (const auto& d : problem.dependencies) {
    const std::size_t a = problem.index_of(d.from), b = problem.index_of(d.to);
    if (d.kind == DependencyKind::implication) {
      needs[b].push_back(a);
    } else if (d.kind == DependencyKind::combination) {
      needs[a].push_back(b);
      needs[b].push_back(a);
    }
  }

  std::vector<bool> in(n, false);
  std::vector<std::size_t> work;
  for (std::size_t i : seed) {
    if (i >= n) throw std::out_of_range("selection index out of range");
    if (!in[i]) {
      in[i] = true;
      work.push_back(i);
    }
  }
  const std::vector<bool> seeded = in;
  while (!work.empty()) {
    const std::size_t j = work.back();
    work.pop_back();
    for (std::size_t r : needs[j]) {
      if (in[r] || is_blocked(r)) continue;
      in[r] = true;
      work.push_back(r);
    }
  }

  Closure c;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    c.viable.push_back(i);
    if (!seeded[i]) c.added.push_back(i);
  }
  for (const auto& d : problem.dependencies) {
    const bool a = in[problem.index_of(d.from)], b = in[problem.index_of(d.to)];
    switch (d.kind) {
      case DependencyKind::implication:
        if (b && !a) c.conflicts.push_back({d, "forced_out"});
        break;
      case DependencyKind::combination:
        if (a != b) c.conflicts.push_back({d, "forced_out"});
        break;
      case DependencyKind::exclusion:
        if (a && b) c.conflicts.push_back({d, "both_selected"});
        break;
    }
  }
  return c;
}

Totals adjusted_totals(const Selection& selection, const ProblemInstance& problem) {
  Totals t;
  std::vector<bool> in(problem.size(), false);
  for (std::size_t i : selection) {
    in.at(i) = true;
    t.effort += problem.requirements[i].effort;
    t.satisfaction += problem.satisfaction[i];
  }
  auto both = [&](const std::pair<std::string, std::string>& key) {
    return in[problem.index_of(key.first)] && in[problem.index_of(key.second)];
  };
  for (const auto& [key, delta] : problem.interactions.delta_e)
    if (both(key)) t.effort += delta;
  for (const auto& [key, delta] : problem.interactions.delta_s)
    if (both(key)) t.satisfaction += delta;
  if (t.effort < 0.0) t.warnings.push_back("adjusted effort is negative");
  if (t.satisfaction < 0.0) t.warnings.push_back("adjusted satisfaction is negative");
  return t;
}

std::vector<std::string> ids_of(const ProblemInstance& problem, const Selection& selection) {
  std::vector<std::string> out;
  out.reserve(selection.size());
  for (std::size_t i : selection) out.push_back(problem.requirements.at(i).id);
  return out;
}

namespace {

double percent(double part, double whole) { return whole != 0.0 ? 100.0 * part / whole : 0.0; }

}  // namespace

ReleasePlan make_plan(const ProblemInstance& problem, const Selection& core, const Closure& closure,
                      std::optional<double> effort_bound) {
  ReleasePlan p;
  p.core = ids_of(problem, core);
  p.added_by_closure = ids_of(problem, closure.added);
  p.viable = ids_of(problem, closure.viable);
  p.conflicts = closure.conflicts;
  p.core_totals = adjusted_totals(core, problem);
  p.viable_totals = adjusted_totals(closure.viable, problem);
  p.instance_effort = problem.total_effort();
  p.instance_satisfaction = problem.total_satisfaction();
  p.coverage.core_effort = percent(p.core_totals.effort, p.instance_effort);
  p.coverage.core_satisfaction = percent(p.core_totals.satisfaction, p.instance_satisfaction);
  p.coverage.viable_effort = percent(p.viable_totals.effort, p.instance_effort);
  p.coverage.viable_satisfaction = percent(p.viable_totals.satisfaction, p.instance_satisfaction);
  p.relative_increase_effort = percent(p.viable_totals.effort - p.core_totals.effort, p.core_totals.effort);
  p.relative_increase_satisfaction =
      percent(p.viable_totals.satisfaction - p.core_totals.satisfaction, p.core_totals.satisfaction);
  p.effort_bound = effort_bound ? effort_bound : problem.effort_bound;
  if (p.effort_bound) p.within_budget = p.viable_totals.effort <= *p.effort_bound;
  return p;
}

ReleasePlan build_plan(const ProblemInstance& problem, const Partition& partition, const MoscowLabeling& labeling) {
  if (partition.labels.size() != problem.size())
    throw std::invalid_argument("partition does not cover the problem's requirements");
  const Selection core = core_set(labeling, partition);
  return make_plan(problem, core, close_dependencies(core, problem));
}

}  // namespace reqclust
