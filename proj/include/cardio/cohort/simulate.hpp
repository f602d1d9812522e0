#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cardio/cohort/feature_table.hpp"
#include "json.hpp"

namespace cardio::cohort {

/// One Gaussian component of a synthetic cohort.
///
/// The spread is given by exactly one of: `sd` alone (independent features),
/// `sd` with `correlation`, or `covariance`. When EF_LVC is derived from the
/// volumes, its entries in the spread are ignored and V_LVC,ED is drawn from
/// N(lvc_ed_mean, lvc_ed_sd) instead.
struct ComponentSpec {
  std::string label;
  double weight = 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(kFeatureCount);
  std::optional<Eigen::VectorXd> sd;
  std::optional<Eigen::MatrixXd> correlation;
  std::optional<Eigen::MatrixXd> covariance;
  double lvc_ed_mean = 0.0;
  double lvc_ed_sd = 0.0;
};

/// Ground-truth columns: pipeline value plus Gaussian noise, with a fraction
/// of volumes replaced by gross positive excursions.
struct ReferenceNoise {
  bool enabled = false;
  double volume_sd = 0.0;
  double ef_sd = 0.0;
  double outlier_rate = 0.0;
  double outlier_shift_min = 0.0;
  double outlier_shift_max = 0.0;
  double missing_rate = 0.0;
};

enum class Allocation { Multinomial, ExactCount };

struct CohortSpec {
  std::size_t total_n = 0;
  std::vector<ComponentSpec> components;
  bool redundant_ef_lvc = true;
  double ef_lvc_noise_sd = 0.0;
  ReferenceNoise reference;
  Allocation allocation = Allocation::Multinomial;
  std::uint64_t seed = 0;

  /// Throws ValidationError describing the first problem found.
  void validate() const;
};

struct SimulatedCohort {
  FeatureTable table;
  std::vector<std::size_t> labels;  // true component per row
  std::vector<double> lvc_ed;       // sampled (or derived) V_LVC,ED per row
};

/// Draws a cohort. Deterministic for a given spec (including its seed).
SimulatedCohort simulate_cohort(const CohortSpec& spec);

/// Per-component counts by largest remainder; ties go to the lower index.
std::vector<std::size_t> exact_counts(const std::vector<double>& weights, std::size_t total);

/// Desk-scale stand-in for the reference cohort: 3822 cases, seven large
/// components with component-specific correlation, an 11-case component with
/// dilated right ventricles, and a 4-case component with dilated, poorly
/// contracting left ventricles. EF_LVC is derived from the LV volumes.
CohortSpec paper_shape_spec(std::uint64_t seed = 2019);

nlohmann::json to_json(const CohortSpec& spec);
CohortSpec cohort_spec_from_json(const nlohmann::json& j);

}  // namespace cardio::cohort
