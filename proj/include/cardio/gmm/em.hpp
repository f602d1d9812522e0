#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "cardio/gmm/model.hpp"

namespace cardio::gmm {

struct EmOptions {
  double tol = 1e-6;   // on the mean per-sample log-likelihood
  int max_iter = 500;
  double reg = 1e-6;   // added to every covariance diagonal
  int restarts = 10;

  void validate() const;
};

/// Fits a k-component mixture by EM, keeping the best of `restarts` runs.
///
/// Each restart seeds k centers with greedy k-means++ (seed derived from
/// (seed, restart)), turns the nearest-center partition into one-hot
/// responsibilities and then alternates M- and E-steps until the mean
/// log-likelihood improves by less than tol. Ties between restarts go to the
/// lower restart index.
///
/// Throws ValidationError for k < 1, k >= n, empty or non-finite data and
/// NumericalError when a covariance cannot be factorized.
GmmModel fit_em(const Eigen::MatrixXd& data, std::size_t k, CovarianceType type, std::uint64_t seed,
                const EmOptions& options = {});

/// Single EM run started from `init` (E-step first), keeping its covariance
/// structure. options.restarts is ignored.
GmmModel fit_em_from(const Eigen::MatrixXd& data, const GmmModel& init, const EmOptions& options = {});

/// Greedy k-means++ seeding: returns indices of k rows of `data`.
std::vector<std::size_t> kmeans_plusplus(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed);

}  // namespace cardio::gmm
