#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reqclust/model.hpp"

namespace reqclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kEffortColumn = 0;
inline constexpr int kSatisfactionColumn = 1;

/// Per-requirement feature rows, raw and z-scored. Row i belongs to ids[i].
struct FeatureMatrix {
  std::vector<std::string> ids;
  Matrix raw;
  Matrix standardized;
  Vector column_means;
  Vector column_std_devs;
  std::vector<std::string> warnings;

  Eigen::Index rows() const { return raw.rows(); }
  Eigen::Index cols() const { return raw.cols(); }
};

/// Builds the (effort, satisfaction) matrix of `problem` and z-scores it.
FeatureMatrix standardize(const ProblemInstance& problem);

/// z = (x - mean) / sd per column, with the sample (n - 1) standard
/// deviation. A constant column becomes all zeros and adds a warning; if
/// every column is constant, throws DegenerateInput.
/// z is rounded to a multiple of 2^-40 so that rescaling a column leaves
/// it bit-identical.
FeatureMatrix standardize(std::vector<std::string> ids, Matrix raw);

}  // namespace reqclust
