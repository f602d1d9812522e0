#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cardio::embed {

/// Column means and population (1/n) SDs, reusable on appended rows.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd sd;

  /// (rows - mean) / sd. Throws ValidationError on dimension mismatch.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
};

struct Standardized {
  Eigen::MatrixXd z;
  Standardizer params;
};

/// z-scores each column. Throws ValidationError naming a zero-variance
/// column (by `names` when given, else by index) or on empty input.
Standardized standardize(const Eigen::MatrixXd& matrix, const std::vector<std::string>& names = {});

}  // namespace cardio::embed
