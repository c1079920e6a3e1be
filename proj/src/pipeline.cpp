#include "reqclust/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "reqclust/errors.hpp"

namespace reqclust {

using nlohmann::json;

namespace {

/// Runs one stage, prefixing any input error with the stage name.
template <typename Fn>
auto in_stage(const char* stage, Fn fn) {
  try {
    return fn();
  } catch (const DegenerateInput& e) {
    throw DegenerateInput(std::string(stage) + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(stage) + ": " + e.what(), e.offending_id());
  }
}

int clamp_k(int k, Eigen::Index n) { return std::clamp<int>(k, 2, static_cast<int>(n - 1)); }

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json estimate_json(const KEstimate& e) {
  json per_k = json::array();
  for (std::size_t i = 0; i < e.ks.size(); ++i) {
    json p{{"k", e.ks[i]}, {"value", e.values[i]}};
    if (!e.standard_errors.empty()) p["standard_error"] = e.standard_errors[i];
    per_k.push_back(std::move(p));
  }
  return {{"method", e.method}, {"per_k", std::move(per_k)}, {"chosen_k", e.chosen_k}};
}

json one_based(const std::vector<int>& labels) {
  json a = json::array();
  for (int l : labels) a.push_back(l + 1);
  return a;
}

json partition_json(const Partition& p, const FeatureMatrix& f) {
  json o{{"algorithm", to_string(p.algorithm)},
         {"k", p.k},
         {"labels", one_based(p.labels)},
         {"sizes", p.sizes()},
         {"centroids_raw", matrix_json(cluster_centroids(f.raw, p.labels, p.k))},
         {"centroids_standardized", matrix_json(p.centroids)}};
  if (p.linkage) o["linkage"] = to_string(*p.linkage);
  if (p.algorithm == Algorithm::kmeans) {
    o["seed"] = p.seed;
    o["iterations"] = p.iterations;
    o["empty_cluster_repairs"] = p.empty_cluster_repairs;
    o["wss_trace"] = p.wss_trace;
  }
  if (p.algorithm == Algorithm::pam) {
    json m = json::array();
    for (auto r : p.medoids) m.push_back(f.ids[r]);
    o["medoids"] = std::move(m);
    o["swaps"] = p.iterations;
  }
  return o;
}

json validity_row_json(const ValidityReport& r) {
  json o{{"algorithm", to_string(r.algorithm)},
         {"k", r.k},
         {"connectivity", number(r.connectivity)},
         {"dunn", number(r.dunn)},
         {"silhouette", number(r.silhouette)},
         {"calinski_harabasz", number(r.calinski_harabasz)},
         {"flags", r.flags}};
  if (r.linkage) o["linkage"] = to_string(*r.linkage);
  return o;
}

json scoreboard_json(const Scoreboard& s) {
  json rows = json::array();
  for (const auto& r : s.rows) rows.push_back(validity_row_json(r));
  json best = json::object();
  for (std::size_t x = 0; x < kValidityIndexes.size(); ++x) {
    const auto& b = s.best_row[x];
    if (!b) {
      best[to_string(kValidityIndexes[x])] = nullptr;
      continue;
    }
    const auto& r = s.rows[*b];
    best[to_string(kValidityIndexes[x])] = {
        {"algorithm", to_string(r.algorithm)}, {"k", r.k}, {"value", index_value(r, kValidityIndexes[x])}};
  }
  json wins = json::object();
  for (Algorithm a : {Algorithm::kmeans, Algorithm::pam, Algorithm::hierarchical})
    wins[to_string(a)] = s.wins[static_cast<std::size_t>(a)];
  return {{"rows", std::move(rows)}, {"best", std::move(best)},   {"wins", std::move(wins)},
          {"winner", to_string(s.winner)}, {"winner_k", s.winner_k}, {"decided_by", s.decided_by},
          {"flags", s.flags}};
}

json totals_json(const Totals& t) {
  return {{"effort", t.effort}, {"satisfaction", t.satisfaction}, {"warnings", t.warnings}};
}

json kplan_json(const KPlan& kp, const FeatureMatrix& f) {
  const Matrix raw_c = cluster_centroids(f.raw, kp.partition.labels, kp.partition.k);
  const auto sizes = kp.partition.sizes();
  json clusters = json::array();
  for (int c = 0; c < kp.partition.k; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    clusters.push_back({{"cluster", c + 1},
                        {"category", to_string(kp.labeling.category_of[cu])},
                        {"score", kp.labeling.score_of[cu]},
                        {"size", sizes[cu]},
                        {"centroid_raw", {{"effort", raw_c(c, kEffortColumn)}, {"satisfaction", raw_c(c, kSatisfactionColumn)}}},
                        {"centroid_standardized",
                         {{"effort", kp.partition.centroids(c, kEffortColumn)},
                          {"satisfaction", kp.partition.centroids(c, kSatisfactionColumn)}}}});
  }
  json points = json::array();
  for (std::size_t i = 0; i < f.ids.size(); ++i) {
    const int c = kp.partition.labels[i];
    const auto row = static_cast<Eigen::Index>(i);
    points.push_back({{"id", f.ids[i]},
                      {"effort", f.raw(row, kEffortColumn)},
                      {"satisfaction", f.raw(row, kSatisfactionColumn)},
                      {"cluster", c + 1},
                      {"category", to_string(kp.labeling.category_of[static_cast<std::size_t>(c)])}});
  }
  return {{"k", kp.k},
          {"algorithm", to_string(kp.algorithm)},
          {"clusters", std::move(clusters)},
          {"points", std::move(points)},
          {"plan", plan_to_json(kp.plan)}};
}

}  // namespace

Partition cluster_with(const Matrix& points, Algorithm algorithm, int k, const PipelineOptions& options) {
  switch (algorithm) {
    case Algorithm::kmeans: return kmeans(points, k, {options.kmeans_restarts, 100, options.seed});
    case Algorithm::pam: return pam(points, k);
    case Algorithm::hierarchical: return cut_dendrogram(hierarchical(points, options.linkage), points, k);
  }
  throw std::invalid_argument("unknown algorithm");
}

const Partition* PipelineReport::partition(Algorithm algorithm, int k) const {
  for (const auto& p : partitions)
    if (p.algorithm == algorithm && p.k == k) return &p;
  return nullptr;
}

PipelineReport run_pipeline(const ProblemInstance& problem, const PipelineOptions& options) {
  if (problem.size() < 3)
    throw DegenerateInput("clustering needs at least 3 requirements, got " + std::to_string(problem.size()));
  if (options.algorithms.empty()) throw std::invalid_argument("no clustering algorithm selected");

  PipelineReport r;
  r.options = options;
  r.features = in_stage("standardize", [&] { return standardize(problem); });
  const Matrix& X = r.features.standardized;
  const Eigen::Index n = X.rows();
  r.warnings = r.features.warnings;

  in_stage("estimate k", [&] {
    const Clusterer scan = kmeans_clusterer({options.kmeans_restarts, 100, options.seed});
    const int k_max = default_k_max(n);
    r.elbow = elbow_k(X, 1, k_max, scan);
    r.silhouette = silhouette_k(X, 2, k_max, scan);
    r.gap = gap_k(X, 1, k_max, scan, {options.gap_bootstrap, options.seed, 0});
    r.majority_k = majority_k({r.elbow.chosen_k, r.silhouette.chosen_k, r.gap.chosen_k}, kMoscowK);
    return 0;
  });
  const int wanted = options.k.value_or(r.majority_k);
  r.selected_k = clamp_k(wanted, n);
  if (r.selected_k != wanted)
    r.warnings.push_back("k = " + std::to_string(wanted) + " clamped to " + std::to_string(r.selected_k));
  const int moscow_k = clamp_k(kMoscowK, n);
  r.analyzed_ks = {moscow_k};
  if (r.selected_k != moscow_k) r.analyzed_ks.push_back(r.selected_k);

  const Matrix D = euclidean_distance_matrix(X);
  std::vector<ValidityReport> rows;
  in_stage("cluster", [&] {
    for (int k : r.analyzed_ks) {
      for (Algorithm a : options.algorithms) {
        r.partitions.push_back(cluster_with(X, a, k, options));
        rows.push_back(evaluate(X, D, r.partitions.back(), options.connectivity_L));
      }
    }
    return 0;
  });
  r.scoreboard = tournament(std::move(rows));
  for (const auto& f : r.scoreboard.flags) r.warnings.push_back(f);

  for (int k : r.analyzed_ks) {
    KPlan kp;
    kp.k = k;
    kp.algorithm = r.scoreboard.winner;
    kp.partition = *r.partition(kp.algorithm, k);
    kp.labeling = map_moscow(kp.partition, r.features);
    kp.plan = build_plan(problem, kp.partition, kp.labeling);
    r.plans.push_back(std::move(kp));
  }
  return r;
}

json plan_to_json(const ReleasePlan& p) {
  json conflicts = json::array();
  for (const auto& c : p.conflicts)
    conflicts.push_back({{"kind", to_string(c.dependency.kind)},
                         {"from", c.dependency.from},
                         {"to", c.dependency.to},
                         {"reason", c.reason}});
  json o{{"core", p.core},
         {"added_by_closure", p.added_by_closure},
         {"viable", p.viable},
         {"conflicts", std::move(conflicts)},
         {"core_totals", totals_json(p.core_totals)},
         {"viable_totals", totals_json(p.viable_totals)},
         {"instance_totals", {{"effort", p.instance_effort}, {"satisfaction", p.instance_satisfaction}}},
         {"coverage",
          {{"core_effort", p.coverage.core_effort},
           {"core_satisfaction", p.coverage.core_satisfaction},
           {"viable_effort", p.coverage.viable_effort},
           {"viable_satisfaction", p.coverage.viable_satisfaction}}},
         {"relative_increase",
          {{"effort", p.relative_increase_effort}, {"satisfaction", p.relative_increase_satisfaction}}},
         {"effort_bound", p.effort_bound ? json(*p.effort_bound) : json(nullptr)},
         {"within_budget", p.within_budget ? json(*p.within_budget) : json(nullptr)}};
  return o;
}

json to_json(const PipelineReport& r, const ProblemInstance& problem) {
  const FeatureMatrix& f = r.features;
  json algorithms = json::array();
  for (Algorithm a : r.options.algorithms) algorithms.push_back(to_string(a));
  json params{{"k", r.options.k ? json(*r.options.k) : json("auto")},
              {"algorithms", std::move(algorithms)},
              {"linkage", to_string(r.options.linkage)},
              {"connectivity_L", r.options.connectivity_L},
              {"gap_B", r.options.gap_bootstrap},
              {"kmeans_restarts", r.options.kmeans_restarts},
              {"seed", r.options.seed}};

  std::size_t implies = 0, combination = 0, exclusion = 0;
  for (const auto& d : problem.dependencies) {
    if (d.kind == DependencyKind::implication) ++implies;
    if (d.kind == DependencyKind::combination) ++combination;
    if (d.kind == DependencyKind::exclusion) ++exclusion;
  }
  json summary{{"requirements", problem.size()},
               {"stakeholders", problem.stakeholders.size()},
               {"dependencies", {{"implies", implies}, {"combination", combination}, {"exclusion", exclusion}}},
               {"interactions", {{"deltaS", problem.interactions.delta_s.size()}, {"deltaE", problem.interactions.delta_e.size()}}},
               {"total_effort", problem.total_effort()},
               {"total_satisfaction", problem.total_satisfaction()},
               {"effort_bound", problem.effort_bound ? json(*problem.effort_bound) : json(nullptr)},
               {"warnings", problem.warnings}};

  json standardization{{"columns", {"effort", "satisfaction"}},
                       {"means", vector_json(f.column_means)},
                       {"std_devs", vector_json(f.column_std_devs)},
                       {"warnings", f.warnings}};

  json estimates{{"elbow", estimate_json(r.elbow)},
                 {"silhouette", estimate_json(r.silhouette)},
                 {"gap", estimate_json(r.gap)},
                 {"majority_k", r.majority_k},
                 {"selected_k", r.selected_k},
                 {"source", r.options.k ? "user" : "majority"},
                 {"analyzed_k", r.analyzed_ks}};

  json partitions = json::array();
  for (const auto& p : r.partitions) partitions.push_back(partition_json(p, f));
  json plans = json::array();
  for (const auto& kp : r.plans) plans.push_back(kplan_json(kp, f));

  return {{"tool", {{"name", "reqclust"}, {"version", "0.1.0"}}},
          {"parameters", std::move(params)},
          {"problem", std::move(summary)},
          {"standardization", std::move(standardization)},
          {"k_estimates", std::move(estimates)},
          {"clusterings", std::move(partitions)},
          {"validity", scoreboard_json(r.scoreboard)},
          {"winner", {{"algorithm", to_string(r.scoreboard.winner)}, {"k", r.scoreboard.winner_k}}},
          {"plans", std::move(plans)},
          {"warnings", r.warnings}};
}

std::string scoreboard_csv(const Scoreboard& s) {
  std::ostringstream out;
  out << "algorithm,linkage,k,connectivity,dunn,silhouette,calinski_harabasz\n";
  auto cell = [](double v) {
    if (!std::isfinite(v)) return std::string("inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (const auto& r : s.rows)
    out << to_string(r.algorithm) << ',' << (r.linkage ? to_string(*r.linkage) : "") << ',' << r.k << ','
        << cell(r.connectivity) << ',' << cell(r.dunn) << ',' << cell(r.silhouette) << ','
        << cell(r.calinski_harabasz) << '\n';
  return out.str();
}

}  // namespace reqclust
