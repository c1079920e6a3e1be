#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reqclust/preprocess.hpp"

namespace reqclust {

enum class Algorithm { kmeans, pam, hierarchical };
enum class Linkage { ward, average, complete, single };

std::string to_string(Algorithm algorithm);
std::string to_string(Linkage linkage);
Algorithm parse_algorithm(const std::string& text);
Linkage parse_linkage(const std::string& text);

/// Assignment of every row to one of k clusters.
///
/// Labels are 0-based and canonical: clusters are numbered in order of the
/// first row that belongs to them, so equal partitions compare equal no
/// matter which algorithm produced them. Every cluster is non-empty and
/// `centroids` row c is always the mean of the rows labeled c.
struct Partition {
  int k = 0;
  std::vector<int> labels;
  Matrix centroids;
  /// Row index of each cluster's medoid (PAM only), indexed by cluster.
  std::vector<std::size_t> medoids;
  Algorithm algorithm = Algorithm::kmeans;
  std::optional<Linkage> linkage;
  std::uint64_t seed = 0;
  int iterations = 0;
  int empty_cluster_repairs = 0;
  /// WSS after each Lloyd iteration of the winning k-means restart.
  std::vector<double> wss_trace;

  std::vector<std::size_t> sizes() const;
  std::vector<std::size_t> members(int cluster) const;
};

/// Canonicalizes arbitrary non-negative labels and fills in centroids. The
/// number of distinct labels becomes k.
Partition make_partition(const Matrix& points, const std::vector<int>& labels,
                         Algorithm algorithm);

Matrix cluster_centroids(const Matrix& points, const std::vector<int>& labels, int k);

/// Symmetric matrix of pairwise Euclidean distances between rows.
Matrix euclidean_distance_matrix(const Matrix& points);
inline Matrix euclidean_distance_matrix(const FeatureMatrix& features) {
  return euclidean_distance_matrix(features.standardized);
}

struct KMeansOptions {
  int restarts = 25;
  int max_iter = 100;
  std::uint64_t seed = 42;
};

/// Lloyd's algorithm from k-means++ seeds, best of `restarts` by WSS.
/// Restart r draws from `derive_seed(seed, r)`, so the result depends only
/// on (points, k, options). A cluster that empties mid-run is reseeded with
/// the point farthest from its own centroid; `empty_cluster_repairs` counts
/// those events for the winning restart.
Partition kmeans(const Matrix& points, int k, const KMeansOptions& options = {});

/// Partitioning around medoids: greedy BUILD, then steepest-descent SWAP
/// until no medoid/non-medoid exchange lowers the total distance. Ties go to
/// the lowest row index.
Partition pam(const Matrix& points, int k);
Partition pam(const Matrix& points, const Matrix& distances, int k);
/// Sum over rows of the distance to the nearest medoid.
double medoid_cost(const Matrix& distances, const std::vector<std::size_t>& medoids);

struct Merge {
  /// Node ids: leaves are 0..n-1, the node created by merge t is n + t.
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

/// n - 1 agglomerations. All four linkages satisfy the reducibility
/// property, so heights never decrease along `merges`.
struct Dendrogram {
  std::size_t n = 0;
  Linkage linkage = Linkage::ward;
  std::vector<Merge> merges;
  std::vector<std::size_t> leaf_order;
};

/// Agglomerative clustering with Lance-Williams updates. Ward works on
/// squared Euclidean distances and reports sqrt heights. At equal heights the
/// pair with the smallest (lower node id, higher node id) merges first.
Dendrogram hierarchical(const Matrix& points, Linkage linkage);

/// Undoes the last k - 1 merges.
Partition cut_dendrogram(const Dendrogram& dendrogram, const Matrix& points, int k);

}  // namespace reqclust
