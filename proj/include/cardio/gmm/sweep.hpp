#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cardio/gmm/em.hpp"
#include "cardio/gmm/model.hpp"

namespace cardio::gmm {

struct SweepOptions {
  std::size_t k_min = 1;
  std::size_t k_max = 15;
  std::vector<CovarianceType> types{CovarianceType::Tied, CovarianceType::Diag, CovarianceType::Full};
  EmOptions em;
  unsigned threads = 1;

  void validate(std::size_t n) const;
};

struct SweepEntry {
  CovarianceType type = CovarianceType::Full;
  std::size_t k = 0;
  bool ok = false;
  double log_likelihood = 0.0;
  std::size_t params = 0;
  double bic = 0.0;
  std::string error;             // set when the fit failed
  std::optional<GmmModel> model; // present when ok
};

struct BicSweep {
  std::size_t n = 0;
  std::vector<SweepEntry> entries;  // type-major in option order, then k ascending
  std::optional<std::size_t> selected;  // argmin BIC over successful cells

  /// Successful entry with the lowest BIC for one structure, if any.
  std::optional<std::size_t> best_for(CovarianceType type) const;
  /// Index of the cell (type, k), if swept.
  std::optional<std::size_t> find(CovarianceType type, std::size_t k) const;
};

/// Seed used for the cell (type, k); restarts derive from it in fit_em.
std::uint64_t cell_seed(std::uint64_t base, CovarianceType type, std::size_t k);

/// Fits every (type, k) cell. Cells run concurrently; a failed fit is
/// recorded in its entry and does not abort the sweep. Ties in BIC go to the
/// earlier entry.
BicSweep sweep(const Eigen::MatrixXd& data, const SweepOptions& options, std::uint64_t seed);

/// Writes `cov_type,k,loglik,params,bic`; failed cells print NA.
void write_sweep_csv(std::ostream& out, const BicSweep& sweep);

}  // namespace cardio::gmm
