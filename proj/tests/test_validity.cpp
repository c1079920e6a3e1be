#include <doctest.h>

#include "oracles.hpp"
#include "reqclust/kselect.hpp"
#include "reqclust/validity.hpp"

using namespace reqclust;

namespace {

ValidityReport row(Algorithm a, int k, double conn, double dunn, double sil, double ch) {
  ValidityReport r;
  r.algorithm = a;
  r.k = k;
  r.connectivity = conn;
  r.dunn = dunn;
  r.silhouette = sil;
  r.calinski_harabasz = ch;
  return r;
}

}  // namespace

TEST_CASE("Dunn index of two separated pairs") {
  Matrix x(4, 2);
  x << 0, 0, 0, 1, 5, 0, 5, 1;
  const Matrix d = euclidean_distance_matrix(x);
  CHECK(dunn(d, {0, 0, 1, 1}, 2) == doctest::Approx(5.0));
  Matrix y(4, 2);
  y << 0, 0, 0, 1, 5, 0, 5, 1;
  // Diameter sqrt(26) across the first cluster, separation 1.
  CHECK(dunn(euclidean_distance_matrix(y), {0, 0, 0, 1}, 2) == doctest::Approx(1.0 / std::sqrt(26.0)));
  Matrix z(3, 1);
  z << 0, 1, 2;
  CHECK(std::isinf(dunn(euclidean_distance_matrix(z), {0, 1, 2}, 3)));
}

TEST_CASE("connectivity examples") {
  Matrix x(10, 2);
  for (int i = 0; i < 5; ++i) {
    x.row(i) << 0.1 * i, 0;
    x.row(5 + i) << 100 + 0.1 * i, 0;
  }
  const std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  CHECK(connectivity(euclidean_distance_matrix(x), labels, 4) == 0.0);

  Matrix y(4, 1);
  y << 0, 1, 1.6, 3;
  // Only row 2's nearest neighbour (row 1) lies in the other cluster.
  CHECK(connectivity(euclidean_distance_matrix(y), {0, 0, 1, 1}, 1) == doctest::Approx(1.0 + 1.0));
  Matrix w(4, 1);
  w << 0, 0.4, 1.1, 5;
  CHECK(connectivity(euclidean_distance_matrix(w), {0, 1, 1, 1}, 1) == doctest::Approx(1.0 + 1.0));
}

TEST_CASE("connectivity breaks distance ties by row index") {
  Matrix x(3, 1);
  x << 0, -1, 1;
  // Row 0 has two neighbours at distance 1: row 1 (cluster 0) ranks first.
  const Matrix d = euclidean_distance_matrix(x);
  CHECK(connectivity(d, {0, 0, 1}, 1) == doctest::Approx(oracle::connectivity(x, {0, 0, 1}, 1)));
}

TEST_CASE("indexes agree with brute force on random partitions") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const long n = 6 + static_cast<long>(rng.index(7));
    const int k = 2 + static_cast<int>(rng.index(3));
    const Matrix x = oracle::random_points(rng, n);
    const auto labels = oracle::random_labels(rng, static_cast<std::size_t>(n), k);
    const Matrix d = euclidean_distance_matrix(x);
    for (int L : {1, 3, 5}) CHECK(connectivity(d, labels, L) == doctest::Approx(oracle::connectivity(x, labels, L)).epsilon(1e-12));
    CHECK(dunn(d, labels, k) == doctest::Approx(oracle::dunn(x, labels)).epsilon(1e-12));
    CHECK(silhouette_index(d, labels, k) == doctest::Approx(oracle::silhouette(x, labels)).epsilon(1e-12));
    CHECK(calinski_harabasz(x, labels, k) == doctest::Approx(oracle::calinski_harabasz(x, labels)).epsilon(1e-9));
  }
}

TEST_CASE("indexes are invariant under relabeling, row order and rotation") {
  Rng rng(12);
  const Matrix x = oracle::random_points(rng, 12);
  const auto labels = oracle::random_labels(rng, 12, 3);
  std::vector<int> relabeled(labels);
  for (int& l : relabeled) l = (l + 1) % 3;
  const Matrix d = euclidean_distance_matrix(x);
  const double theta = 0.7;
  Eigen::Matrix2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Matrix xr = x * rot.transpose();
  const Matrix dr = euclidean_distance_matrix(xr);
  std::vector<long> perm(12);
  for (long i = 0; i < 12; ++i) perm[static_cast<std::size_t>(i)] = 11 - i;
  Matrix xp(12, 2);
  std::vector<int> lp(12);
  for (long i = 0; i < 12; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    lp[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  const Matrix dp = euclidean_distance_matrix(xp);
  CHECK(dunn(d, relabeled, 3) == doctest::Approx(dunn(d, labels, 3)));
  CHECK(dunn(dr, labels, 3) == doctest::Approx(dunn(d, labels, 3)));
  CHECK(dunn(dp, lp, 3) == doctest::Approx(dunn(d, labels, 3)));
  CHECK(silhouette_index(d, relabeled, 3) == doctest::Approx(silhouette_index(d, labels, 3)));
  CHECK(silhouette_index(dr, labels, 3) == doctest::Approx(silhouette_index(d, labels, 3)));
  CHECK(silhouette_index(dp, lp, 3) == doctest::Approx(silhouette_index(d, labels, 3)));
  CHECK(calinski_harabasz(x, relabeled, 3) == doctest::Approx(calinski_harabasz(x, labels, 3)));
  CHECK(calinski_harabasz(xr, labels, 3) == doctest::Approx(calinski_harabasz(x, labels, 3)));
  CHECK(calinski_harabasz(xp, lp, 3) == doctest::Approx(calinski_harabasz(x, labels, 3)));
  CHECK(connectivity(d, relabeled, 5) == doctest::Approx(connectivity(d, labels, 5)));
  CHECK(connectivity(dr, labels, 5) == doctest::Approx(connectivity(d, labels, 5)));
}

TEST_CASE("silhouette index equals the mean silhouette width") {
  Rng rng(4);
  const Matrix x = oracle::random_points(rng, 10);
  const auto labels = oracle::random_labels(rng, 10, 3);
  const Matrix d = euclidean_distance_matrix(x);
  const auto w = silhouette_widths(d, labels, 3);
  double s = 0.0;
  for (double v : w) s += v;
  CHECK(silhouette_index(d, labels, 3) == s / 10.0);
}

TEST_CASE("Calinski-Harabasz prefers a real split and flags zero spread") {
  Rng rng(31);
  Matrix blob(20, 2), pair(20, 2);
  for (long i = 0; i < 20; ++i) {
    blob.row(i) << rng.normal(), rng.normal();
    pair.row(i) << rng.normal() + (i < 10 ? 0.0 : 20.0), rng.normal();
  }
  std::vector<int> halves(20);
  for (std::size_t i = 0; i < 20; ++i) halves[i] = i < 10 ? 0 : 1;
  CHECK(calinski_harabasz(blob, halves, 2) < calinski_harabasz(pair, halves, 2));

  Matrix dup(4, 1);
  dup << 0, 0, 3, 3;
  CHECK(std::isinf(calinski_harabasz(dup, {0, 0, 1, 1}, 2)));
  const auto r = evaluate(dup, euclidean_distance_matrix(dup), make_partition(dup, {0, 0, 1, 1}, Algorithm::pam));
  CHECK(r.flags.size() == 2);
}

TEST_CASE("well separated blobs have a high silhouette") {
  Rng rng(2);
  Matrix x(40, 2);
  std::vector<int> labels(40);
  for (long i = 0; i < 40; ++i) {
    const int b = static_cast<int>(i / 20);
    x.row(i) << 10.0 * b + 0.5 * rng.normal(), 0.5 * rng.normal();
    labels[static_cast<std::size_t>(i)] = b;
  }
  CHECK(silhouette_index(euclidean_distance_matrix(x), labels, 2) > 0.7);
}

TEST_CASE("tournament: one algorithm sweeping every index wins") {
  const auto s = tournament({row(Algorithm::kmeans, 4, 14.3071, 0.1317, 0.5801, 89.1628),
                             row(Algorithm::pam, 4, 15.7456, 0.0909, 0.5765, 87.6092),
                             row(Algorithm::hierarchical, 4, 16.0647, 0.1249, 0.5655, 83.4536)});
  CHECK(s.winner == Algorithm::kmeans);
  CHECK(s.wins[static_cast<std::size_t>(Algorithm::kmeans)] == 4);
  CHECK(s.decided_by == "wins");
  CHECK(s.winner_k == 4);
}

TEST_CASE("tournament pools rows across k") {
  const std::vector<ValidityReport> rows{
      row(Algorithm::kmeans, 3, 17.7056, 0.0548, 0.4283, 89.5132),
      row(Algorithm::pam, 3, 13.4373, 0.0831, 0.4308, 89.3966),
      row(Algorithm::hierarchical, 3, 7.2357, 0.1096, 0.4278, 88.0933),
      row(Algorithm::kmeans, 4, 18.9746, 0.0783, 0.3993, 90.9959),
      row(Algorithm::pam, 4, 26.2714, 0.0696, 0.3993, 88.7641),
      row(Algorithm::hierarchical, 4, 14.8242, 0.1096, 0.3964, 82.5902)};
  const auto s = tournament(rows);
  CHECK(s.winner == Algorithm::hierarchical);
  CHECK(s.winner_k == 3);
  CHECK(s.wins[static_cast<std::size_t>(Algorithm::hierarchical)] == 2);
  CHECK(*s.best_row[1] == 2);  // Dunn tie between k=3 and k=4 goes to the smaller k
}

TEST_CASE("tournament ties go to the silhouette winner, then Dunn, then fixed order") {
  auto s = tournament({row(Algorithm::kmeans, 4, 20.5603, 0.2527, 0.4176, 24.3832),
                       row(Algorithm::pam, 4, 19.9687, 0.3151, 0.4116, 24.0329),
                       row(Algorithm::hierarchical, 4, 19.9782, 0.2482, 0.3561, 18.7909)});
  CHECK(s.winner == Algorithm::kmeans);
  CHECK(s.decided_by == "silhouette");

  // Two-way tie where the silhouette winner is not a leader: Dunn decides.
  s = tournament({row(Algorithm::kmeans, 2, 1.0, 0.1, 0.1, 5.0), row(Algorithm::pam, 2, 2.0, 0.3, 0.2, 1.0),
                  row(Algorithm::hierarchical, 2, 3.0, 0.2, 0.9, 1.0)});
  CHECK(s.wins[static_cast<std::size_t>(Algorithm::kmeans)] == 2);
  CHECK(s.winner == Algorithm::kmeans);

  s = tournament({row(Algorithm::kmeans, 2, 1.0, 0.5, 0.1, 2.0), row(Algorithm::pam, 2, 2.0, 0.1, 0.9, 3.0)});
  CHECK(s.winner == Algorithm::pam);
  CHECK(s.decided_by == "silhouette");

  s = tournament({row(Algorithm::hierarchical, 2, 1.0, 0.5, 0.5, 2.0), row(Algorithm::kmeans, 2, 1.0, 0.5, 0.5, 2.0)});
  CHECK(s.winner == Algorithm::kmeans);
}

TEST_CASE("infinite index values never win and are flagged") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto s = tournament({row(Algorithm::kmeans, 2, 1.0, inf, 0.5, inf), row(Algorithm::pam, 2, 2.0, 0.5, 0.4, 3.0)});
  CHECK(s.rows[*s.best_row[1]].algorithm == Algorithm::pam);
  CHECK(s.rows[*s.best_row[3]].algorithm == Algorithm::pam);
  CHECK(s.flags.size() == 2);
}
