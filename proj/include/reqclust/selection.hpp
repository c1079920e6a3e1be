#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "reqclust/clustering.hpp"
#include "reqclust/model.hpp"

namespace reqclust {

enum class Category { must, should, could, wont, extra };
std::string to_string(Category category);

/// Category and score per cluster. Scores are satisfaction_z - effort_z of
/// the standardized centroid.
struct MoscowLabeling {
  std::vector<Category> category_of;
  std::vector<double> score_of;
  /// Cluster indexes from best to worst score.
  std::vector<int> ranking;

  int must_cluster() const { return ranking.front(); }
};

/// Ranks centroids by score, descending; equal scores go to the higher
/// satisfaction, then the lower cluster index. The first four ranks get
/// Must, Should, Could, Wont and any further ones Extra.
MoscowLabeling map_moscow(const Partition& partition, const FeatureMatrix& features);

/// Sorted row indexes into the problem's requirements.
using Selection = std::vector<std::size_t>;

Selection core_set(const MoscowLabeling& labeling, const Partition& partition);

/// A dependency the selection does not honour. `reason` is "both_selected"
/// for exclusions and "forced_out" when closure needed a blocked requirement.
struct Conflict {
  Dependency dependency;
  std::string reason;

  friend bool operator==(const Conflict&, const Conflict&) = default;
};

struct Closure {
  Selection viable;
  /// viable minus the seed, sorted.
  Selection added;
  std::vector<Conflict> conflicts;
};

/// Smallest superset of `seed` closed under implication (a selected `to`
/// pulls in its `from`) and combination (a selected member pulls in its
/// partner). Requirements flagged in `blocked` are never added; every
/// dependency left unsatisfied because of one is reported as a conflict, as
/// is every exclusion whose two sides are both selected. Conflicts follow
/// the problem's dependency order.
Closure close_dependencies(const Selection& seed, const ProblemInstance& problem,
                           const std::vector<bool>* blocked = nullptr);

struct Totals {
  double effort = 0.0;
  double satisfaction = 0.0;
  std::vector<std::string> warnings;
};

/// Plain sums plus the pairwise ΔE / ΔS of every selected pair.
Totals adjusted_totals(const Selection& selection, const ProblemInstance& problem);

struct Coverage {
  double core_effort = 0.0;
  double core_satisfaction = 0.0;
  double viable_effort = 0.0;
  double viable_satisfaction = 0.0;
};

struct ReleasePlan {
  std::vector<std::string> core;
  std::vector<std::string> added_by_closure;
  std::vector<std::string> viable;
  std::vector<Conflict> conflicts;
  Totals core_totals;
  Totals viable_totals;
  /// Unadjusted sums over every requirement; denominators of `coverage`.
  double instance_effort = 0.0;
  double instance_satisfaction = 0.0;
  /// Percentages of the instance totals.
  Coverage coverage;
  /// 100 * (viable - core) / core per dimension; 0 when the core total is 0.
  double relative_increase_effort = 0.0;
  double relative_increase_satisfaction = 0.0;
  std::optional<double> effort_bound;
  std::optional<bool> within_budget;
};

/// Assembles a plan from a core selection and its closure. `effort_bound`
/// overrides the problem's own bound when given.
ReleasePlan make_plan(const ProblemInstance& problem, const Selection& core, const Closure& closure,
                      std::optional<double> effort_bound = std::nullopt);

ReleasePlan build_plan(const ProblemInstance& problem, const Partition& partition,
                       const MoscowLabeling& labeling);

std::vector<std::string> ids_of(const ProblemInstance& problem, const Selection& selection);

}  // namespace reqclust
