#pragma once

#include <string>
#include <vector>

#include "cardio/cohort/catalog.hpp"
#include "cardio/cohort/feature_table.hpp"
#include "cardio/select/dependence.hpp"
#include "json.hpp"

namespace cardio::select {

struct Thresholds {
  double r_abs = 0.8;  // inclusive: |r| >= r_abs flags a pair
  double mic = 0.5;    // inclusive: mic >= mic flags a pair
};

struct PairMeasure {
  std::size_t a = 0;  // catalog positions, a < b
  std::size_t b = 0;
  std::string feature_a;
  std::string feature_b;
  double pearson = 0.0;
  double mic = 0.0;
  bool flagged = false;
};

struct CorrelationReport {
  std::vector<std::string> features;
  Thresholds thresholds;
  std::vector<PairMeasure> pairs;  // (0,1), (0,2), ..., (7,8)

  std::vector<const PairMeasure*> flagged() const;
};

bool is_flagged(double r, double mic, const Thresholds& t);

/// Pearson and MIC for every unordered pair of the nine features. Pairs are
/// computed independently and may run on several threads.
/// Throws ValidationError naming any zero-variance feature.
CorrelationReport correlation_matrix(const cohort::FeatureTable& table, const Thresholds& thresholds = {},
                                     const MicOptions& mic_options = {}, unsigned threads = 1);

/// Which member of an offending pair is dropped when both have the same
/// number of flagged partners.
enum class DropRule { LaterInCatalog, EarlierInCatalog };

struct DroppedFeature {
  std::string name;
  std::string cause_a;
  std::string cause_b;
  double pearson = 0.0;
  double mic = 0.0;
};

struct SelectionResult {
  std::vector<std::string> kept;  // catalog order
  std::vector<DroppedFeature> dropped;
};

/// Repeatedly takes the worst flagged pair among kept features (largest
/// max(|r|/r_abs, mic/mic)) and drops the member with more flagged partners
/// among the kept features; equal counts fall back to `rule`.
SelectionResult select_features(const CorrelationReport& report, const cohort::FeatureCatalog& catalog,
                                DropRule rule = DropRule::LaterInCatalog);

nlohmann::json to_json(const CorrelationReport& report);
nlohmann::json to_json(const SelectionResult& selection);
SelectionResult selection_from_json(const nlohmann::json& j);

}  // namespace cardio::select
