#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reqclust/kselect.hpp"
#include "reqclust/model.hpp"
#include "reqclust/selection.hpp"
#include "reqclust/validity.hpp"

namespace reqclust {

inline constexpr int kMoscowK = 4;

struct PipelineOptions {
  /// Fixed k instead of the majority estimate.
  std::optional<int> k;
  std::vector<Algorithm> algorithms{Algorithm::kmeans, Algorithm::pam, Algorithm::hierarchical};
  Linkage linkage = Linkage::ward;
  int connectivity_L = kDefaultConnectivityL;
  int gap_bootstrap = 100;
  std::uint64_t seed = 42;
  int kmeans_restarts = 25;
};

/// Partition of the standardized features by one algorithm.
Partition cluster_with(const Matrix& points, Algorithm algorithm, int k, const PipelineOptions& options);

struct KPlan {
  int k = 0;
  Algorithm algorithm = Algorithm::pam;
  Partition partition;
  MoscowLabeling labeling;
  ReleasePlan plan;
};

struct PipelineReport {
  PipelineOptions options;
  FeatureMatrix features;
  KEstimate elbow;
  KEstimate silhouette;
  KEstimate gap;
  int majority_k = 0;
  /// k actually used besides the MoSCoW k, after clamping to [2, n - 1].
  int selected_k = 0;
  std::vector<int> analyzed_ks;
  /// One per (analyzed k, algorithm), in that nesting order.
  std::vector<Partition> partitions;
  Scoreboard scoreboard;
  /// One per analyzed k, all with the tournament winner.
  std::vector<KPlan> plans;
  std::vector<std::string> warnings;

  const Partition* partition(Algorithm algorithm, int k) const;
};

/// standardize -> estimate k -> cluster every algorithm at the MoSCoW k and
/// the estimate -> tournament -> MoSCoW labels and release plan per k.
/// Throws DegenerateInput for fewer than three requirements.
PipelineReport run_pipeline(const ProblemInstance& problem, const PipelineOptions& options = {});

nlohmann::json plan_to_json(const ReleasePlan& plan);
nlohmann::json to_json(const PipelineReport& report, const ProblemInstance& problem);
std::string scoreboard_csv(const Scoreboard& scoreboard);

}  // namespace reqclust
