#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "reqclust/clustering.hpp"

namespace reqclust {

inline constexpr int kDefaultConnectivityL = 10;

/// Sum over rows of 1/j for every j <= L whose j-th nearest neighbour lies
/// in another cluster. Neighbours are ranked by (distance, row index).
/// L is capped at n - 1. Lower is better.
double connectivity(const Matrix& distances, const std::vector<int>& labels, int L = kDefaultConnectivityL);

/// Smallest between-cluster point distance over largest cluster diameter.
/// +infinity when every cluster has zero diameter.
double dunn(const Matrix& distances, const std::vector<int>& labels, int k);

/// Mean silhouette width over all rows.
double silhouette_index(const Matrix& distances, const std::vector<int>& labels, int k);

/// [B/(k-1)] / [W/(n-k)]; +infinity when W is zero. Requires 2 <= k <= n-1.
double calinski_harabasz(const Matrix& points, const std::vector<int>& labels, int k);

struct ValidityReport {
  Algorithm algorithm = Algorithm::kmeans;
  std::optional<Linkage> linkage;
  int k = 0;
  double connectivity = 0.0;
  double dunn = 0.0;
  double silhouette = 0.0;
  double calinski_harabasz = 0.0;
  /// Set when an index hit its +infinity sentinel.
  std::vector<std::string> flags;
};

ValidityReport evaluate(const Matrix& points, const Matrix& distances, const Partition& partition,
                        int L = kDefaultConnectivityL);

enum class ValidityIndex { connectivity, dunn, silhouette, calinski_harabasz };
inline constexpr std::array<ValidityIndex, 4> kValidityIndexes{
    ValidityIndex::connectivity, ValidityIndex::dunn, ValidityIndex::silhouette,
    ValidityIndex::calinski_harabasz};

std::string to_string(ValidityIndex index);
double index_value(const ValidityReport& report, ValidityIndex index);
/// Connectivity is minimized, the other three maximized.
bool lower_is_better(ValidityIndex index);

struct Scoreboard {
  std::vector<ValidityReport> rows;
  /// Winning row per index, aligned with kValidityIndexes; empty when every
  /// value of that index was infinite.
  std::array<std::optional<std::size_t>, 4> best_row;
  /// Wins per algorithm, indexed by Algorithm.
  std::array<int, 3> wins{};
  Algorithm winner = Algorithm::pam;
  /// k of the winner's row that took the most indexes (smaller k on ties).
  int winner_k = 0;
  /// How the winner was decided: "wins", "silhouette", "dunn" or "order".
  std::string decided_by;
  std::vector<std::string> flags;
};

/// Each index awards one win to the algorithm owning its best row across
/// all supplied rows; the algorithm with most wins is selected. Ties between
/// rows go to pam, kmeans, hierarchical in that order, then smaller k. Ties
/// between algorithms go to the silhouette winner, then the Dunn winner, then
/// the same fixed order. Infinite values never win and are flagged.
Scoreboard tournament(std::vector<ValidityReport> rows);

}  // namespace reqclust
