#include "reqclust/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "reqclust/kselect.hpp"

namespace reqclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Position of an algorithm in the fixed preference order pam > kmeans > hierarchical.
int preference(Algorithm a) {
  switch (a) {
    case Algorithm::pam: return 0;
    case Algorithm::kmeans: return 1;
    case Algorithm::hierarchical: return 2;
  }
  return 3;
}

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

double connectivity(const Matrix& distances, const std::vector<int>& labels, int L) {
  const auto n = static_cast<std::size_t>(distances.rows());
  if (L < 1) throw std::invalid_argument("connectivity needs L >= 1");
  const std::size_t depth = std::min<std::size_t>(static_cast<std::size_t>(L), n - 1);
  std::vector<std::size_t> order;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    auto dist = [&](std::size_t j) {
      return distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(depth), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = dist(a), db = dist(b);
                        return da < db || (da == db && a < b);
                      });
    for (std::size_t j = 0; j < depth; ++j)
      if (labels[order[j]] != labels[i]) total += 1.0 / static_cast<double>(j + 1);
  }
  return total;
}

double dunn(const Matrix& distances, const std::vector<int>& labels, int k) {
  if (k < 2) throw std::invalid_argument("Dunn index needs k >= 2");
  const std::size_t n = labels.size();
  double separation = kInf, diameter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (labels[i] == labels[j])
        diameter = std::max(diameter, d);
      else
        separation = std::min(separation, d);
    }
  }
  return diameter > 0.0 ? separation / diameter : kInf;
}

double silhouette_index(const Matrix& distances, const std::vector<int>& labels, int k) {
  if (k < 2) throw std::invalid_argument("silhouette index needs k >= 2");
  return mean_silhouette(distances, labels, k);
}

double calinski_harabasz(const Matrix& points, const std::vector<int>& labels, int k) {
  const auto n = points.rows();
  if (k < 2 || k > n - 1) throw std::invalid_argument("Calinski-Harabasz needs 2 <= k <= n - 1");
  const Matrix c = cluster_centroids(points, labels, k);
  const Eigen::RowVectorXd mean = points.colwise().mean();
  std::vector<double> size(static_cast<std::size_t>(k), 0.0);
  for (int l : labels) size[static_cast<std::size_t>(l)] += 1.0;
  double between = 0.0;
  for (int l = 0; l < k; ++l) between += size[static_cast<std::size_t>(l)] * (c.row(l) - mean).squaredNorm();
  const double within = wss(points, labels);
  if (within <= 0.0) return kInf;
  return (between / static_cast<double>(k - 1)) / (within / static_cast<double>(n - k));
}

ValidityReport evaluate(const Matrix& points, const Matrix& distances, const Partition& p, int L) {
  ValidityReport r;
  r.algorithm = p.algorithm;
  r.linkage = p.linkage;
  r.k = p.k;
  r.connectivity = connectivity(distances, p.labels, L);
  r.dunn = dunn(distances, p.labels, p.k);
  r.silhouette = silhouette_index(distances, p.labels, p.k);
  r.calinski_harabasz = calinski_harabasz(points, p.labels, p.k);
  if (std::isinf(r.dunn)) r.flags.push_back("dunn: every cluster has zero diameter");
  if (std::isinf(r.calinski_harabasz)) r.flags.push_back("calinski_harabasz: within-cluster sum of squares is zero");
  return r;
}

std::string to_string(ValidityIndex index) {
  switch (index) {
    case ValidityIndex::connectivity: return "connectivity";
    case ValidityIndex::dunn: return "dunn";
    case ValidityIndex::silhouette: return "silhouette";
    case ValidityIndex::calinski_harabasz: return "calinski_harabasz";
  }
  return "connectivity";
}

double index_value(const ValidityReport& r, ValidityIndex index) {
  switch (index) {
    case ValidityIndex::connectivity: return r.connectivity;
    case ValidityIndex::dunn: return r.dunn;
    case ValidityIndex::silhouette: return r.silhouette;
    case ValidityIndex::calinski_harabasz: return r.calinski_harabasz;
  }
  return 0.0;
}

bool lower_is_better(ValidityIndex index) { return index == ValidityIndex::connectivity; }

Scoreboard tournament(std::vector<ValidityReport> rows) {
  if (rows.empty()) throw std::invalid_argument("tournament needs at least one row");
  Scoreboard s;
  s.rows = std::move(rows);
  const auto& R = s.rows;

  for (std::size_t x = 0; x < kValidityIndexes.size(); ++x) {
    const ValidityIndex idx = kValidityIndexes[x];
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < R.size(); ++r) {
      const double v = index_value(R[r], idx);
      if (std::isinf(v)) {
        s.flags.push_back(to_string(idx) + " of " + to_string(R[r].algorithm) + " at k=" +
                          std::to_string(R[r].k) + " is infinite and was excluded");
        continue;
      }
      if (!best) {
        best = r;
        continue;
      }
      const double bv = index_value(R[*best], idx);
      bool take;
      if (same_value(v, bv)) {
        const auto key = std::make_pair(preference(R[r].algorithm), R[r].k);
        const auto bkey = std::make_pair(preference(R[*best].algorithm), R[*best].k);
        take = key < bkey;
      } else {
        take = lower_is_better(idx) ? v < bv : v > bv;
      }
      if (take) best = r;
    }
    s.best_row[x] = best;
    if (best) ++s.wins[static_cast<std::size_t>(R[*best].algorithm)];
  }

  const int top = *std::max_element(s.wins.begin(), s.wins.end());
  std::vector<Algorithm> leaders;
  for (Algorithm a : {Algorithm::pam, Algorithm::kmeans, Algorithm::hierarchical})
    if (s.wins[static_cast<std::size_t>(a)] == top) leaders.push_back(a);

  auto winner_of = [&](ValidityIndex idx) -> std::optional<Algorithm> {
    const auto& b = s.best_row[static_cast<std::size_t>(idx)];
    if (!b) return std::nullopt;
    return R[*b].algorithm;
  };
  auto leads = [&](std::optional<Algorithm> a) {
    return a && std::find(leaders.begin(), leaders.end(), *a) != leaders.end();
  };

  if (leaders.size() == 1) {
    s.winner = leaders.front();
    s.decided_by = "wins";
  } else if (auto a = winner_of(ValidityIndex::silhouette); leads(a)) {
    s.winner = *a;
    s.decided_by = "silhouette";
  } else if (auto b = winner_of(ValidityIndex::dunn); leads(b)) {
    s.winner = *b;
    s.decided_by = "dunn";
  } else {
    s.winner = leaders.front();
    s.decided_by = "order";
  }

  // Which of the winner's rows collected its wins.
  std::vector<std::pair<int, int>> per_k;  // (k, wins)
  for (const auto& b : s.best_row) {
    if (!b || R[*b].algorithm != s.winner) continue;
    auto it = std::find_if(per_k.begin(), per_k.end(), [&](const auto& e) { return e.first == R[*b].k; });
    if (it == per_k.end())
      per_k.emplace_back(R[*b].k, 1);
    else
      ++it->second;
  }
  if (per_k.empty()) {
    for (const auto& r : R)
      if (r.algorithm == s.winner && (s.winner_k == 0 || r.k < s.winner_k)) s.winner_k = r.k;
  } else {
    std::sort(per_k.begin(), per_k.end(),
              [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
    s.winner_k = per_k.front().first;
  }
  return s;
}

}  // namespace reqclust
