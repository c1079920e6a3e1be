#include "reqclust/kselect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "reqclust/random.hpp"

namespace reqclust {

namespace {

void check_range(const Matrix& points, int k_min, int k_max, int lowest) {
  if (k_min < lowest || k_min > k_max || k_max > std::max<Eigen::Index>(points.rows() - 1, 1))
    throw std::invalid_argument("k range [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                                "] is invalid for " + std::to_string(points.rows()) + " rows");
}

std::vector<int> k_range(int k_min, int k_max) {
  std::vector<int> ks;
  for (int k = k_min; k <= k_max; ++k) ks.push_back(k);
  return ks;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double log_wss(const Matrix& points, const Clusterer& clusterer, int k) {
  // Guard log(0) when a reference set or the data has k coincident groups.
  const double w = wss(points, clusterer(points, k));
  return std::log(std::max(w, std::numeric_limits<double>::min()));
}

}  // namespace

Clusterer kmeans_clusterer(KMeansOptions options) {
  return [options](const Matrix& points, int k) { return kmeans(points, k, options); };
}

Clusterer pam_clusterer() {
  return [](const Matrix& points, int k) { return pam(points, k); };
}

Clusterer hierarchical_clusterer(Linkage linkage) {
  return [linkage](const Matrix& points, int k) {
    return cut_dendrogram(hierarchical(points, linkage), points, k);
  };
}

int default_k_max(Eigen::Index n) { return static_cast<int>(std::min<Eigen::Index>(10, n - 1)); }

double wss(const Matrix& points, const std::vector<int>& labels) {
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  const Matrix c = cluster_centroids(points, labels, k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    total += (points.row(i) - c.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return total;
}

double wss(const Matrix& points, const Partition& partition) { return wss(points, partition.labels); }

int knee_of(const std::vector<int>& ks, const std::vector<double>& values) {
  if (ks.empty() || ks.size() != values.size()) throw std::invalid_argument("knee_of needs a non-empty curve");
  if (ks.size() < 3) return ks.front();
  const double x0 = ks.front(), y0 = values.front();
  const double x1 = ks.back(), y1 = values.back();
  const double slope = (y1 - y0) / (x1 - x0);
  const double scale = std::max(std::abs(y0), std::abs(y1));
  // Vertical gap to the chord is proportional to the perpendicular distance.
  int best = ks[1];
  double best_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    const double gap = (y0 + slope * (ks[i] - x0)) - values[i];
    if (gap > best_gap + 1e-12 * scale) {
      best_gap = gap;
      best = ks[i];
    }
  }
  return best;
}

KEstimate elbow_k(const Matrix& points, int k_min, int k_max, const Clusterer& clusterer) {
  check_range(points, k_min, k_max, 1);
  KEstimate e;
  e.method = "elbow";
  e.ks = k_range(k_min, k_max);
  e.values.resize(e.ks.size());
  parallel_for(e.ks.size(), 0, [&](std::size_t i) { e.values[i] = wss(points, clusterer(points, e.ks[i])); });
  e.chosen_k = knee_of(e.ks, e.values);
  return e;
}

std::vector<double> silhouette_widths(const Matrix& distances, const std::vector<int>& labels, int k) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++size[static_cast<std::size_t>(l)];
  std::vector<double> out(n, 0.0);
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (size[own] < 2) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      sums[static_cast<std::size_t>(labels[j])] += distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const double a = sums[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c)
      if (c != own && size[c] > 0) b = std::min(b, sums[c] / static_cast<double>(size[c]));
    const double denom = std::max(a, b);
    out[i] = (denom > 0.0 && std::isfinite(b)) ? (b - a) / denom : 0.0;
  }
  return out;
}

double silhouette_of(std::size_t i, const Matrix& distances, const std::vector<int>& labels, int k) {
  return silhouette_widths(distances, labels, k).at(i);
}

double mean_silhouette(const Matrix& distances, const std::vector<int>& labels, int k) {
  const auto w = silhouette_widths(distances, labels, k);
  double total = 0.0;
  for (double v : w) total += v;
  return w.empty() ? 0.0 : total / static_cast<double>(w.size());
}

KEstimate silhouette_k(const Matrix& points, int k_min, int k_max, const Clusterer& clusterer) {
  check_range(points, k_min, k_max, 2);
  const Matrix d = euclidean_distance_matrix(points);
  KEstimate e;
  e.method = "silhouette";
  e.ks = k_range(k_min, k_max);
  e.values.resize(e.ks.size());
  parallel_for(e.ks.size(), 0, [&](std::size_t i) {
    const Partition p = clusterer(points, e.ks[i]);
    e.values[i] = mean_silhouette(d, p.labels, p.k);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < e.values.size(); ++i)
    if (e.values[i] > e.values[best]) best = i;
  e.chosen_k = e.ks[best];
  return e;
}

KEstimate gap_k(const Matrix& points, int k_min, int k_max, const Clusterer& clusterer,
                const GapOptions& options) {
  check_range(points, k_min, k_max, 1);
  if (options.bootstrap < 10) throw std::invalid_argument("gap statistic needs at least 10 reference sets");
  const auto ks = k_range(k_min, k_max);
  const std::size_t nk = ks.size();
  const auto B = static_cast<std::size_t>(options.bootstrap);
  const Eigen::Index n = points.rows(), d = points.cols();
  const Vector lo = points.colwise().minCoeff();
  const Vector hi = points.colwise().maxCoeff();

  std::vector<double> observed(nk);
  // reference[b * nk + i] = log W*_{k_i} for reference set b.
  std::vector<double> reference(B * nk);
  parallel_for(nk + B, options.threads, [&](std::size_t task) {
    if (task < nk) {
      observed[task] = log_wss(points, clusterer, ks[task]);
      return;
    }
    const std::size_t b = task - nk;
    Rng rng(derive_seed(options.seed, b));
    Matrix ref(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) ref(i, j) = rng.uniform(lo(j), hi(j));
    for (std::size_t i = 0; i < nk; ++i) reference[b * nk + i] = log_wss(ref, clusterer, ks[i]);
  });

  KEstimate e;
  e.method = "gap";
  e.ks = ks;
  e.values.resize(nk);
  e.standard_errors.resize(nk);
  const double bd = static_cast<double>(B);
  for (std::size_t i = 0; i < nk; ++i) {
    double mean = 0.0;
    for (std::size_t b = 0; b < B; ++b) mean += reference[b * nk + i];
    mean /= bd;
    double ss = 0.0;
    for (std::size_t b = 0; b < B; ++b) ss += (reference[b * nk + i] - mean) * (reference[b * nk + i] - mean);
    e.values[i] = mean - observed[i];
    e.standard_errors[i] = std::sqrt(ss / (bd - 1.0)) * std::sqrt(1.0 + 1.0 / bd);
  }
  e.chosen_k = ks.back();
  for (std::size_t i = 0; i + 1 < nk; ++i) {
    if (e.values[i] >= e.values[i + 1] - e.standard_errors[i + 1]) {
      e.chosen_k = ks[i];
      break;
    }
  }
  return e;
}

int majority_k(const std::vector<int>& chosen, int fallback) {
  std::map<int, std::size_t> votes;
  for (int k : chosen) ++votes[k];
  for (const auto& [k, count] : votes)
    if (2 * count > chosen.size()) return k;
  return fallback;
}

}  // namespace reqclust
