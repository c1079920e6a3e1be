#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "reqclust/clustering.hpp"

namespace reqclust {

/// Produces a k-cluster partition of the given points.
using Clusterer = std::function<Partition(const Matrix&, int)>;

Clusterer kmeans_clusterer(KMeansOptions options = {});
Clusterer pam_clusterer();
Clusterer hierarchical_clusterer(Linkage linkage = Linkage::ward);

struct KEstimate {
  std::string method;
  std::vector<int> ks;
  /// WSS, mean silhouette or gap, aligned with `ks`.
  std::vector<double> values;
  /// Gap only: s_k aligned with `ks`.
  std::vector<double> standard_errors;
  int chosen_k = 0;
};

/// Default upper end of every scan: min(10, n - 1).
int default_k_max(Eigen::Index n);

/// Total within-cluster sum of squared distances to the centroids.
double wss(const Matrix& points, const Partition& partition);
double wss(const Matrix& points, const std::vector<int>& labels);

/// Knee of a decreasing curve: the interior point farthest below the chord
/// joining the two endpoints. Ties go to the smaller k; with fewer than three
/// points the first k is returned.
int knee_of(const std::vector<int>& ks, const std::vector<double>& values);

KEstimate elbow_k(const Matrix& points, int k_min, int k_max, const Clusterer& clusterer);

/// Silhouette width of every row; 0 for members of singleton clusters.
std::vector<double> silhouette_widths(const Matrix& distances, const std::vector<int>& labels, int k);
double silhouette_of(std::size_t i, const Matrix& distances, const std::vector<int>& labels, int k);
double mean_silhouette(const Matrix& distances, const std::vector<int>& labels, int k);

KEstimate silhouette_k(const Matrix& points, int k_min, int k_max, const Clusterer& clusterer);

struct GapOptions {
  int bootstrap = 100;
  std::uint64_t seed = 42;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Gap(k) = mean log W*_k over reference sets drawn uniformly from the
/// bounding box of the data, minus log W_k. Reference set b is drawn from
/// `derive_seed(seed, b)`, so the curve does not depend on thread count.
KEstimate gap_k(const Matrix& points, int k_min, int k_max, const Clusterer& clusterer,
                const GapOptions& options = {});

/// Value chosen by more than half of the estimates, else `fallback`.
int majority_k(const std::vector<int>& chosen, int fallback = 4);

}  // namespace reqclust
