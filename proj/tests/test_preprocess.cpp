#include <doctest.h>

#include "reqclust/errors.hpp"
#include "reqclust/preprocess.hpp"
#include "support.hpp"

using namespace reqclust;

TEST_CASE("standardized columns have zero mean and unit sample deviation") {
  const auto f = standardize(load_fixture("nrp20.json"));
  REQUIRE(f.rows() == 20);
  for (Eigen::Index c = 0; c < 2; ++c) {
    const auto col = f.standardized.col(c);
    CHECK(col.mean() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((col.array() - col.mean()).square().sum() / 19.0 == doctest::Approx(1.0));
  }
  CHECK(f.column_means(kEffortColumn) == doctest::Approx(85.0 / 20.0));
  CHECK(f.raw(0, kSatisfactionColumn) == 54.0);
}

TEST_CASE("a constant column becomes zeros with a warning") {
  Matrix raw(3, 2);
  raw << 1, 5, 2, 5, 3, 5;
  const auto f = standardize({"a", "b", "c"}, raw);
  CHECK(f.standardized.col(1).isZero());
  CHECK(f.warnings.size() == 1);
  CHECK(f.standardized(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("all-constant features are degenerate") {
  Matrix raw(3, 2);
  raw << 1, 5, 1, 5, 1, 5;
  CHECK_THROWS_AS(standardize({"a", "b", "c"}, raw), DegenerateInput);
}
