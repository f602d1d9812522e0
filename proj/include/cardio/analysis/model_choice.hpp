#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cardio/gmm/sweep.hpp"
#include "json.hpp"

namespace cardio::analysis {

struct CandidateK {
  std::size_t entry = 0;  // index into the sweep
  std::size_t k = 0;
  double bic = 0.0;
  std::size_t small_clusters = 0;
};

struct ModelChoice {
  std::size_t entry = 0;  // chosen sweep entry
  gmm::CovarianceType type = gmm::CovarianceType::Full;
  std::size_t k = 0;
  std::size_t small_threshold = 0;
  std::vector<CandidateK> candidates;  // the band that was examined
};

/// Picks the covariance structure at the BIC argmin, then, among that
/// structure's component counts whose BIC lies within `bic_band` of its best,
/// the count giving the most non-empty clusters of size <= floor(fraction*n).
/// Ties go to the smaller k. bic_band = 0 reduces to the plain argmin.
/// Throws NumericalError if no sweep cell succeeded.
ModelChoice choose_model(const gmm::BicSweep& sweep, const Eigen::MatrixXd& data, double small_fraction,
                         double bic_band);

nlohmann::json to_json(const ModelChoice& choice);

}  // namespace cardio::analysis
