#include "reqclust/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <stdexcept>

#include "reqclust/errors.hpp"
#include "reqclust/random.hpp"

namespace reqclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

void check_k(const Matrix& points, int k, int k_min) {
  if (k < k_min || k > points.rows())
    throw std::invalid_argument("k = " + std::to_string(k) + " outside [" + std::to_string(k_min) +
                                ", " + std::to_string(points.rows()) + "]");
}

std::vector<int> canonical_labels(const std::vector<int>& labels, int* k_out) {
  std::vector<int> remap;
  std::vector<int> out(labels.size());
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0) throw std::invalid_argument("negative cluster label");
    if (static_cast<std::size_t>(l) >= remap.size()) remap.resize(static_cast<std::size_t>(l) + 1, -1);
    if (remap[static_cast<std::size_t>(l)] < 0) remap[static_cast<std::size_t>(l)] = next++;
    out[i] = remap[static_cast<std::size_t>(l)];
  }
  *k_out = next;
  return out;
}

double wss_of(const Matrix& points, const std::vector<int>& labels, const Matrix& centers) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    total += squared_distance(points, i, centers, labels[static_cast<std::size_t>(i)]);
  return total;
}

struct LloydRun {
  std::vector<int> labels;
  double wss = kInf;
  int iterations = 0;
  int repairs = 0;
  std::vector<double> trace;
};

Matrix kmeanspp_seeds(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centers(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::size_t first = rng.index(static_cast<std::size_t>(n));
  centers.row(0) = points.row(static_cast<Eigen::Index>(first));
  chosen[first] = true;
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(points, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = static_cast<std::size_t>(n);
      for (std::size_t i = 0; i < d2.size(); ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc > u) {
          pick = i;
          break;
        }
      }
      if (pick == static_cast<std::size_t>(n)) {
        // u landed in the rounding slack at the top; take the last candidate.
        for (std::size_t i = d2.size(); i-- > 0;)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
      }
    } else {
      // Every point coincides with a center already; any unused row will do.
      while (pick < chosen.size() && chosen[pick]) ++pick;
    }
    chosen[pick] = true;
    centers.row(c) = points.row(static_cast<Eigen::Index>(pick));
    for (Eigen::Index i = 0; i < n; ++i)
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], squared_distance(points, i, centers, c));
  }
  return centers;
}

LloydRun lloyd(const Matrix& points, int k, int max_iter, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centers = kmeanspp_seeds(points, k, rng);
  LloydRun run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = kInf;
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(points, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      auto& l = run.labels[static_cast<std::size_t>(i)];
      if (l != best) {
        l = best;
        changed = true;
      }
    }
    if (!changed) break;
    run.iterations = iter + 1;

    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int l : run.labels) ++counts[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      // Empty cluster: steal the point farthest from its own centroid among
      // clusters that can spare one.
      Matrix current = cluster_centroids(points, run.labels, k);
      double far_d = -1.0;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int l = run.labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(l)] < 2) continue;
        const double d = squared_distance(points, i, current, l);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) break;
      --counts[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(far)])];
      run.labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      ++run.repairs;
    }
    centers = cluster_centroids(points, run.labels, k);
    run.trace.push_back(wss_of(points, run.labels, centers));
  }
  centers = cluster_centroids(points, run.labels, k);
  run.wss = wss_of(points, run.labels, centers);
  if (run.trace.empty() || run.trace.back() != run.wss) run.trace.push_back(run.wss);
  return run;
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::pam: return "pam";
    case Algorithm::hierarchical: return "hierarchical";
  }
  return "kmeans";
}

std::string to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::ward: return "ward";
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
    case Linkage::single: return "single";
  }
  return "ward";
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "kmeans" || text == "k-means") return Algorithm::kmeans;
  if (text == "pam") return Algorithm::pam;
  if (text == "hierarchical") return Algorithm::hierarchical;
  throw std::invalid_argument("unknown algorithm '" + text + "'");
}

Linkage parse_linkage(const std::string& text) {
  if (text == "ward") return Linkage::ward;
  if (text == "average") return Linkage::average;
  if (text == "complete") return Linkage::complete;
  if (text == "single") return Linkage::single;
  throw std::invalid_argument("unknown linkage '" + text + "'");
}

std::vector<std::size_t> Partition::sizes() const {
  std::vector<std::size_t> s(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++s[static_cast<std::size_t>(l)];
  return s;
}

std::vector<std::size_t> Partition::members(int cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == cluster) out.push_back(i);
  return out;
}

Matrix cluster_centroids(const Matrix& points, const std::vector<int>& labels, int k) {
  Matrix c = Matrix::Zero(k, points.cols());
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    c.row(l) += points.row(i);
    counts[static_cast<std::size_t>(l)] += 1.0;
  }
  for (int l = 0; l < k; ++l)
    if (counts[static_cast<std::size_t>(l)] > 0) c.row(l) /= counts[static_cast<std::size_t>(l)];
  return c;
}

Partition make_partition(const Matrix& points, const std::vector<int>& labels, Algorithm algorithm) {
  if (static_cast<Eigen::Index>(labels.size()) != points.rows())
    throw std::invalid_argument("label count does not match the number of rows");
  Partition p;
  p.labels = canonical_labels(labels, &p.k);
  p.centroids = cluster_centroids(points, p.labels, p.k);
  p.algorithm = algorithm;
  return p;
}

Matrix euclidean_distance_matrix(const Matrix& points) {
  const Eigen::Index n = points.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (points.row(i) - points.row(j)).norm();
  return d;
}

Partition kmeans(const Matrix& points, int k, const KMeansOptions& options) {
  check_k(points, k, 1);
  if (options.restarts < 1) throw std::invalid_argument("k-means needs at least one restart");
  LloydRun best;
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    LloydRun run = lloyd(points, k, options.max_iter, rng);
    if (run.wss < best.wss) best = std::move(run);
  }
  Partition p = make_partition(points, best.labels, Algorithm::kmeans);
  p.seed = options.seed;
  p.iterations = best.iterations;
  p.empty_cluster_repairs = best.repairs;
  p.wss_trace = std::move(best.trace);
  return p;
}

double medoid_cost(const Matrix& distances, const std::vector<std::size_t>& medoids) {
  double cost = 0.0;
  for (Eigen::Index j = 0; j < distances.rows(); ++j) {
    double best = kInf;
    for (auto m : medoids) best = std::min(best, distances(static_cast<Eigen::Index>(m), j));
    cost += best;
  }
  return cost;
}

Partition pam(const Matrix& points, int k) { return pam(points, euclidean_distance_matrix(points), k); }

Partition pam(const Matrix& points, const Matrix& dist, int k) {
  check_k(points, k, 1);
  const auto n = static_cast<std::size_t>(points.rows());
  auto D = [&](std::size_t a, std::size_t b) {
    return dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };

  std::vector<std::size_t> medoids;
  std::vector<bool> is_medoid(n, false);
  std::vector<double> nearest(n, kInf);

  // BUILD
  {
    std::size_t first = 0;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += D(i, j);
      if (s < best) {
        best = s;
        first = i;
      }
    }
    medoids.push_back(first);
    is_medoid[first] = true;
    for (std::size_t j = 0; j < n; ++j) nearest[j] = D(first, j);
  }
  while (medoids.size() < static_cast<std::size_t>(k)) {
    std::size_t pick = n;
    double best_gain = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (is_medoid[c]) continue;
      double gain = 0.0;
      for (std::size_t j = 0; j < n; ++j) gain += std::max(nearest[j] - D(c, j), 0.0);
      if (gain > best_gain) {
        best_gain = gain;
        pick = c;
      }
    }
    medoids.push_back(pick);
    is_medoid[pick] = true;
    for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], D(pick, j));
  }

  // SWAP
  int iterations = 0;
  std::vector<std::size_t> owner(n);
  std::vector<double> second(n);
  while (true) {
    double cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double d1 = kInf, d2 = kInf;
      std::size_t o = 0;
      for (std::size_t m = 0; m < medoids.size(); ++m) {
        const double d = D(medoids[m], j);
        if (d < d1) {
          d2 = d1;
          d1 = d;
          o = m;
        } else if (d < d2) {
          d2 = d;
        }
      }
      nearest[j] = d1;
      second[j] = d2;
      owner[j] = o;
      cost += d1;
    }
    double best_delta = 0.0;
    std::size_t best_m = 0, best_h = n;
    for (std::size_t m = 0; m < medoids.size(); ++m) {
      for (std::size_t h = 0; h < n; ++h) {
        if (is_medoid[h]) continue;
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double dh = D(h, j);
          const double now = owner[j] == m ? std::min(dh, second[j]) : std::min(nearest[j], dh);
          delta += now - nearest[j];
        }
        if (delta < best_delta) {
          best_delta = delta;
          best_m = m;
          best_h = h;
        }
      }
    }
    // Strict improvement, with slack for rounding so equal-cost swaps cannot cycle.
    if (best_h == n || best_delta >= -1e-12 * std::max(1.0, cost)) break;
    is_medoid[medoids[best_m]] = false;
    medoids[best_m] = best_h;
    is_medoid[best_h] = true;
    ++iterations;
  }

  std::vector<int> labels(n);
  for (std::size_t j = 0; j < n; ++j) {
    double best = kInf;
    for (std::size_t m = 0; m < medoids.size(); ++m) {
      const double d = D(medoids[m], j);
      if (d < best || (d == best && medoids[m] == j)) {
        best = d;
        labels[j] = static_cast<int>(m);
      }
    }
  }
  // A medoid always labels itself; guarantees non-empty clusters with duplicates.
  for (std::size_t m = 0; m < medoids.size(); ++m) labels[medoids[m]] = static_cast<int>(m);

  Partition p = make_partition(points, labels, Algorithm::pam);
  p.medoids.assign(static_cast<std::size_t>(p.k), 0);
  for (std::size_t m = 0; m < medoids.size(); ++m)
    p.medoids[static_cast<std::size_t>(p.labels[medoids[m]])] = medoids[m];
  p.iterations = iterations;
  return p;
}

Dendrogram hierarchical(const Matrix& points, Linkage linkage) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw std::invalid_argument("hierarchical clustering needs at least 2 rows");
  const bool ward = linkage == Linkage::ward;

  // Working dissimilarities between active slots; Ward keeps squared values.
  Matrix d = euclidean_distance_matrix(points);
  if (ward) d = d.cwiseProduct(d);
  std::vector<std::size_t> node(n), size(n, 1);
  std::iota(node.begin(), node.end(), 0);
  std::vector<bool> active(n, true);
  std::vector<std::size_t> nn(n, 0);
  std::vector<double> nnd(n, kInf);

  auto at = [&](std::size_t a, std::size_t b) {
    return d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };
  // (distance, partner node id) ordering for nearest-neighbour ties.
  auto better = [&](double dist, std::size_t cand, double best, std::size_t incumbent) {
    return dist < best || (dist == best && node[cand] < node[incumbent]);
  };
  auto refresh = [&](std::size_t i) {
    nnd[i] = kInf;
    nn[i] = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      if (nn[i] == i || better(at(i, j), j, nnd[i], nn[i])) {
        nnd[i] = at(i, j);
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  Dendrogram dg;
  dg.n = n;
  dg.linkage = linkage;
  dg.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      if (a == n) {
        a = i;
        continue;
      }
      const auto key_i = std::make_tuple(nnd[i], std::min(node[i], node[nn[i]]), std::max(node[i], node[nn[i]]));
      const auto key_a = std::make_tuple(nnd[a], std::min(node[a], node[nn[a]]), std::max(node[a], node[nn[a]]));
      if (key_i < key_a) a = i;
    }
    std::size_t b = nn[a];
    if (node[b] < node[a]) std::swap(a, b);
    const double dab = at(a, b);
    const double na = static_cast<double>(size[a]);
    const double nb = static_cast<double>(size[b]);

    Merge m;
    m.left = node[a];
    m.right = node[b];
    m.height = ward ? std::sqrt(std::max(dab, 0.0)) : dab;
    m.size = size[a] + size[b];
    dg.merges.push_back(m);

    // The merged cluster lives in slot a; slot b retires.
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double dka = at(k, a), dkb = at(k, b);
      const double nk = static_cast<double>(size[k]);
      double v = 0.0;
      switch (linkage) {
        case Linkage::single: v = std::min(dka, dkb); break;
        case Linkage::complete: v = std::max(dka, dkb); break;
        case Linkage::average: v = (na * dka + nb * dkb) / (na + nb); break;
        case Linkage::ward: v = ((na + nk) * dka + (nb + nk) * dkb - nk * dab) / (na + nb + nk); break;
      }
      d(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(a)) = v;
      d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = v;
    }
    active[b] = false;
    size[a] += size[b];
    node[a] = n + step;

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a) continue;
      if (nn[k] == a || nn[k] == b) {
        refresh(k);
      } else if (better(at(k, a), a, nnd[k], nn[k])) {
        nnd[k] = at(k, a);
        nn[k] = a;
      }
    }
    refresh(a);
  }

  // Leaf order: left-first traversal from the root.
  std::vector<std::size_t> stack{2 * n - 2};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (v < n) {
      dg.leaf_order.push_back(v);
    } else {
      const Merge& mg = dg.merges[v - n];
      stack.push_back(mg.right);
      stack.push_back(mg.left);
    }
  }
  return dg;
}

Partition cut_dendrogram(const Dendrogram& dg, const Matrix& points, int k) {
  if (static_cast<std::size_t>(points.rows()) != dg.n)
    throw std::invalid_argument("dendrogram and points disagree on n");
  check_k(points, k, 1);
  const std::size_t n = dg.n;
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const std::size_t applied = n - static_cast<std::size_t>(k);
  for (std::size_t t = 0; t < applied; ++t) {
    const Merge& m = dg.merges[t];
    parent[find(m.left)] = n + t;
    parent[find(m.right)] = n + t;
  }
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(find(i));
  Partition p = make_partition(points, labels, Algorithm::hierarchical);
  p.linkage = dg.linkage;
  return p;
}

}  // namespace reqclust
