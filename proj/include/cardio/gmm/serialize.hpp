#pragma once

#include <string>
#include <vector>

#include "cardio/gmm/model.hpp"
#include "json.hpp"

namespace cardio::gmm {

/// {"covariance_type", "k", "d", "features", "weights", "means", "covariance",
///  "fit": {...}}. The covariance layout follows the structure tag: one
/// matrix for tied, k variance rows for diag, k matrices for full.
nlohmann::json to_json(const GmmModel& model, const std::vector<std::string>& features);

struct LoadedModel {
  GmmModel model;
  std::vector<std::string> features;
};

/// Inverse of to_json. Throws ValidationError naming the offending field.
LoadedModel model_from_json(const nlohmann::json& j);

}  // namespace cardio::gmm
