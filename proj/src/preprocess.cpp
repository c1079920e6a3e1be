#include "reqclust/preprocess.hpp"

#include <cmath>

#include "reqclust/errors.hpp"

namespace reqclust {

namespace {
constexpr int kSnapBits = 40;
}  // namespace

FeatureMatrix standardize(const ProblemInstance& problem) {
  const auto n = static_cast<Eigen::Index>(problem.size());
  Matrix raw(n, 2);
  std::vector<std::string> ids;
  ids.reserve(problem.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(i);
    raw(i, kEffortColumn) = problem.requirements[j].effort;
    raw(i, kSatisfactionColumn) = problem.satisfaction[j];
    ids.push_back(problem.requirements[j].id);
  }
  return standardize(std::move(ids), std::move(raw));
}

FeatureMatrix standardize(std::vector<std::string> ids, Matrix raw) {
  const Eigen::Index n = raw.rows();
  const Eigen::Index d = raw.cols();
  if (n < 2) throw DegenerateInput("standardization needs at least 2 rows");
  if (static_cast<Eigen::Index>(ids.size()) != n)
    throw DegenerateInput("id list does not match the number of feature rows");

  FeatureMatrix fm;
  fm.ids = std::move(ids);
  fm.column_means = raw.colwise().mean().transpose();
  fm.column_std_devs.resize(d);
  fm.standardized.resize(n, d);
  int constant = 0;
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto centered = (raw.col(c).array() - fm.column_means(c)).eval();
    const double sd = std::sqrt(centered.square().sum() / static_cast<double>(n - 1));
    fm.column_std_devs(c) = sd;
    // Relative test: a column that is constant up to rounding is constant.
    const double scale = raw.col(c).cwiseAbs().maxCoeff();
    if (sd == 0.0 || sd <= 1e-14 * scale) {
      fm.standardized.col(c).setZero();
      fm.warnings.push_back("column " + std::to_string(c) + " is constant; standardized to zeros");
      ++constant;
    } else {
      // Snapping to a 2^-40 grid makes z-scores identical under rescaling of
      // the raw column, so exact distance ties survive a change of units.
      fm.standardized.col(c) = (centered / sd).unaryExpr([](double z) {
        return std::ldexp(std::nearbyint(std::ldexp(z, kSnapBits)), -kSnapBits);
      }).matrix();
    }
  }
  if (constant == d) throw DegenerateInput("all rows are identical; clustering is meaningless");
  fm.raw = std::move(raw);
  return fm;
}

}  // namespace reqclust
