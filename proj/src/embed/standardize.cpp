#include "cardio/embed/standardize.hpp"

#include <cmath>

#include "cardio/errors.hpp"

namespace cardio::embed {

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != mean.size()) {
    throw ValidationError("standardize: rows have " + std::to_string(rows.cols()) + " columns, expected " +
                          std::to_string(mean.size()));
  }
  return (rows.rowwise() - mean).array().rowwise() / sd.array();
}

Standardized standardize(const Eigen::MatrixXd& matrix, const std::vector<std::string>& names) {
  if (matrix.rows() < 1 || matrix.cols() < 1) throw ValidationError("standardize: empty matrix");
  if (!matrix.allFinite()) throw ValidationError("standardize: matrix contains non-finite values");
  const double n = static_cast<double>(matrix.rows());
  Standardized out;
  out.params.mean = matrix.colwise().sum() / n;
  out.params.sd.resize(matrix.cols());
  for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
    const double var = (matrix.col(c).array() - out.params.mean(c)).square().sum() / n;
    if (!(var > 0.0)) {
      const std::string label = static_cast<std::size_t>(c) < names.size() ? "'" + names[static_cast<std::size_t>(c)] + "'"
                                                                            : std::to_string(c);
      throw ValidationError("standardize: column " + label + " has zero variance");
    }
    out.params.sd(c) = std::sqrt(var);
  }
  out.z = out.params.apply(matrix);
  return out;
}

}  // namespace cardio::embed
