#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cardio/cohort/feature_table.hpp"
#include "json.hpp"

namespace cardio::analysis {

enum class Pathology { RVA = 0, DCM = 1, HCM_partial = 2 };
inline constexpr std::size_t kPathologyCount = 3;
inline constexpr std::array<Pathology, kPathologyCount> kPathologies{Pathology::RVA, Pathology::DCM,
                                                                     Pathology::HCM_partial};

std::string_view to_string(Pathology p);

/// Threshold rules; all comparisons are strict.
///   RVA:         V_RVC,ED > rva_volume  OR  EF_RVC < rva_ef
///   DCM:         V_LVC,ED > dcm_volume  AND EF_LVC < dcm_ef   (ED derived)
///   HCM_partial: MT_LVM,ED > hcm_thickness AND EF_LVC >= hcm_ef
/// HCM is thickness-only since LV mass is not among the features.
struct PathologyRules {
  double rva_volume = 110.0;  // mL/m2
  double rva_ef = 0.40;
  double dcm_volume = 100.0;  // mL/m2
  double dcm_ef = 0.40;
  double hcm_thickness = 15.0;  // mm
  double hcm_ef = 0.40;

  /// Thresholds must be positive; EF thresholds in (0, 1).
  void validate() const;
};

struct PathologySet {
  std::array<bool, kPathologyCount> has{};
  bool contains(Pathology p) const { return has[static_cast<std::size_t>(p)]; }
  bool empty() const { return !has[0] && !has[1] && !has[2]; }
};

/// Evaluates the rules on one 9-feature record in catalog order. Throws
/// ValidationError if EF_LVC is outside [0, 1).
PathologySet match_pathology(std::span<const double> row, const PathologyRules& rules = {});

struct PathologyProfile {
  std::size_t cluster = 0;
  std::size_t size = 0;
  std::array<double, kPathologyCount> proportion{};
  std::optional<Pathology> dominant;  // label held by more than half the members
};

/// One profile per non-empty cluster, ordered by cluster index. Ties for
/// dominance cannot occur since a label needs a strict majority; if several
/// labels exceed one half the most frequent wins, then the lowest enum value.
std::vector<PathologyProfile> cluster_pathology_profile(const cohort::FeatureTable& table,
                                                        std::span<const std::size_t> labels,
                                                        const PathologyRules& rules = {});

nlohmann::json to_json(const PathologyProfile& profile);

}  // namespace cardio::analysis
