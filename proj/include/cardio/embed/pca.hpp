#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cardio/embed/embedding.hpp"
#include "cardio/embed/standardize.hpp"

namespace cardio::embed {

struct PcaModel {
  Standardizer scaling;
  Eigen::MatrixXd components;      // d x c, orthonormal columns
  Eigen::VectorXd explained_ratio; // c, non-increasing
};

/// PCA of the standardized matrix: top eigenvectors of its sample covariance,
/// each signed so that its largest-magnitude coordinate is positive (the
/// first such coordinate on ties). Throws ValidationError if n_components is
/// 0 or exceeds min(n, d), or on zero-variance columns.
PcaModel pca_fit(const Eigen::MatrixXd& matrix, std::size_t n_components = 2,
                 const std::vector<std::string>& names = {});

/// Standardizes with the stored parameters and projects. `roles` defaults to
/// all cases. Throws ValidationError on dimension or role-count mismatch.
Embedding pca_project(const PcaModel& model, const Eigen::MatrixXd& rows, std::vector<RowRole> roles = {});

}  // namespace cardio::embed
