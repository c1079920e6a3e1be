#include <doctest.h>

#include <map>
#include <set>

#include "oracles.hpp"
#include "reqclust/clustering.hpp"
#include "reqclust/kselect.hpp"

using namespace reqclust;

namespace {

Matrix four_corners() {
  Matrix x(4, 2);
  x << 0, 0, 0, 1, 5, 0, 5, 1;
  return x;
}

/// Agglomeration that recomputes every cluster distance from the members.
std::vector<std::pair<std::set<long>, double>> naive_agglomerate(const Matrix& x, Linkage linkage) {
  std::vector<std::set<long>> clusters;
  for (long i = 0; i < x.rows(); ++i) clusters.push_back({i});
  auto between = [&](const std::set<long>& a, const std::set<long>& b) {
    if (linkage == Linkage::ward) {
      std::vector<double> ma(2, 0.0), mb(2, 0.0);
      for (long i : a) for (int c = 0; c < 2; ++c) ma[c] += x(i, c) / a.size();
      for (long i : b) for (int c = 0; c < 2; ++c) mb[c] += x(i, c) / b.size();
      const double d2 = (ma[0] - mb[0]) * (ma[0] - mb[0]) + (ma[1] - mb[1]) * (ma[1] - mb[1]);
      return std::sqrt(2.0 * a.size() * b.size() / (a.size() + b.size()) * d2);
    }
    double lo = 1e300, hi = 0.0, sum = 0.0;
    for (long i : a)
      for (long j : b) {
        const double d = oracle::dist(x, i, j);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        sum += d;
      }
    if (linkage == Linkage::single) return lo;
    if (linkage == Linkage::complete) return hi;
    return sum / (a.size() * b.size());
  };
  std::vector<std::pair<std::set<long>, double>> merges;
  while (clusters.size() > 1) {
    std::size_t ba = 0, bb = 1;
    double best = 1e300;
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double d = between(clusters[a], clusters[b]);
        if (d < best) {
          best = d;
          ba = a;
          bb = b;
        }
      }
    std::set<long> merged = clusters[ba];
    merged.insert(clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<long>(bb));
    clusters[ba] = merged;
    merges.emplace_back(merged, best);
  }
  return merges;
}

std::set<long> leaves_of(const Dendrogram& dg, std::size_t node) {
  if (node < dg.n) return {static_cast<long>(node)};
  const auto& m = dg.merges[node - dg.n];
  auto a = leaves_of(dg, m.left);
  auto b = leaves_of(dg, m.right);
  a.insert(b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("euclidean distance matrix matches the definition") {
  Rng rng(3);
  const Matrix x = oracle::random_points(rng, 9, 3);
  const Matrix d = euclidean_distance_matrix(x);
  for (long i = 0; i < 9; ++i)
    for (long j = 0; j < 9; ++j) CHECK(d(i, j) == doctest::Approx(oracle::dist(x, i, j)).epsilon(1e-14));
}

TEST_CASE("make_partition numbers clusters by first appearance") {
  const Partition p = make_partition(four_corners(), {7, 7, 2, 2}, Algorithm::kmeans);
  CHECK(p.k == 2);
  CHECK(p.labels == std::vector<int>{0, 0, 1, 1});
  CHECK(p.centroids(1, 0) == 5.0);
  CHECK(p.centroids(1, 1) == 0.5);
}

TEST_CASE("k-means finds the optimal split of the four corners") {
  const Partition p = kmeans(four_corners(), 2);
  CHECK(p.labels == std::vector<int>{0, 0, 1, 1});
  CHECK(wss(four_corners(), p) == doctest::Approx(1.0));
  CHECK(oracle::best_wss(four_corners(), 2) == doctest::Approx(1.0));
}

TEST_CASE("k-means reaches the exhaustive optimum on small random sets") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_points(rng, 8);
    for (int k : {2, 3}) {
      const Partition p = kmeans(x, k);
      CHECK(wss(x, p) == doctest::Approx(oracle::best_wss(x, k)).epsilon(1e-9));
    }
  }
}

TEST_CASE("k-means WSS trace never increases and the run is reproducible") {
  Rng rng(5);
  const Matrix x = oracle::random_points(rng, 60);
  const Partition a = kmeans(x, 5, {1, 100, 9});
  for (std::size_t i = 1; i < a.wss_trace.size(); ++i) CHECK(a.wss_trace[i] <= a.wss_trace[i - 1] + 1e-12);
  const Partition b = kmeans(x, 5, {1, 100, 9});
  CHECK(a.labels == b.labels);
  CHECK(kmeans(x, 5).labels == kmeans(x, 5).labels);
}

TEST_CASE("k-means keeps every cluster non-empty with duplicated points") {
  Matrix x(6, 2);
  x << 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2;
  const Partition p = kmeans(x, 3);
  CHECK(p.k == 3);
  for (auto s : p.sizes()) CHECK(s > 0);
}

TEST_CASE("PAM ends where no single swap improves the medoid cost") {
  const Partition corners = pam(four_corners(), 2);
  CHECK(corners.labels == std::vector<int>{0, 0, 1, 1});
  CHECK(medoid_cost(euclidean_distance_matrix(four_corners()), corners.medoids) == doctest::Approx(2.0));
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix x = oracle::random_points(rng, 10);
    for (int k : {2, 3, 4}) {
      const Partition p = pam(x, k);
      const Matrix d = euclidean_distance_matrix(x);
      const double cost = medoid_cost(d, p.medoids);
      CHECK(cost >= oracle::best_medoid_cost(x, k) - 1e-9);
      for (std::size_t m = 0; m < p.medoids.size(); ++m)
        for (std::size_t o = 0; o < 10; ++o) {
          if (std::find(p.medoids.begin(), p.medoids.end(), o) != p.medoids.end()) continue;
          auto swapped = p.medoids;
          swapped[m] = o;
          CHECK(medoid_cost(d, swapped) >= cost - 1e-12);
        }
      for (int c = 0; c < p.k; ++c) CHECK(p.labels[p.medoids[static_cast<std::size_t>(c)]] == c);
    }
  }
}

TEST_CASE("PAM finds the optimal medoids of separated groups") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix x(9, 2);
    for (long i = 0; i < 9; ++i) x.row(i) << 20.0 * static_cast<double>(i / 3) + rng.normal(), rng.normal();
    CHECK(medoid_cost(euclidean_distance_matrix(x), pam(x, 3).medoids) ==
          doctest::Approx(oracle::best_medoid_cost(x, 3)).epsilon(1e-12));
  }
}

TEST_CASE("hierarchical merges match a naive agglomeration for every linkage") {
  Rng rng(8);
  for (Linkage linkage : {Linkage::ward, Linkage::average, Linkage::complete, Linkage::single}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix x = oracle::random_points(rng, 12);
      const Dendrogram dg = hierarchical(x, linkage);
      const auto expected = naive_agglomerate(x, linkage);
      REQUIRE(dg.merges.size() == expected.size());
      for (std::size_t t = 0; t < expected.size(); ++t) {
        CHECK(dg.merges[t].height == doctest::Approx(expected[t].second).epsilon(1e-9));
        CHECK(leaves_of(dg, dg.n + t) == expected[t].first);
        CHECK(dg.merges[t].size == expected[t].first.size());
        if (t > 0) CHECK(dg.merges[t].height >= dg.merges[t - 1].height - 1e-12);
      }
      CHECK(dg.leaf_order.size() == 12);
    }
  }
}

TEST_CASE("equal heights merge the lowest node ids first") {
  Matrix x(4, 1);
  x << 0, 1, 10, 11;
  const Dendrogram dg = hierarchical(x, Linkage::single);
  CHECK(dg.merges[0].left == 0);
  CHECK(dg.merges[0].right == 1);
  CHECK(dg.merges[1].left == 2);
  CHECK(dg.merges[1].right == 3);
}

TEST_CASE("cutting the dendrogram yields k clusters") {
  const Matrix x = four_corners();
  const Dendrogram dg = hierarchical(x, Linkage::average);
  CHECK(cut_dendrogram(dg, x, 1).labels == std::vector<int>{0, 0, 0, 0});
  CHECK(cut_dendrogram(dg, x, 2).labels == std::vector<int>{0, 0, 1, 1});
  CHECK(cut_dendrogram(dg, x, 4).labels == std::vector<int>{0, 1, 2, 3});
  CHECK(cut_dendrogram(dg, x, 2).linkage == Linkage::average);
}

TEST_CASE("invalid k is rejected") {
  CHECK_THROWS_AS(kmeans(four_corners(), 0), std::invalid_argument);
  CHECK_THROWS_AS(pam(four_corners(), 5), std::invalid_argument);
  CHECK_THROWS_AS(parse_linkage("centroid"), std::invalid_argument);
}
