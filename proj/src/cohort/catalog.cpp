#include "cardio/cohort/catalog.hpp"

#include <set>

#include "cardio/errors.hpp"

namespace cardio::cohort {

const FeatureCatalog& FeatureCatalog::standard() {
  static const FeatureCatalog catalog({
      {"v_rvc_ed", "V_RVC,ED", "mL/m2", FeatureKind::Volume, true},
      {"v_lvc_es", "V_LVC,ES", "mL/m2", FeatureKind::Volume, true},
      {"ef_rvc", "EF_RVC", "fraction", FeatureKind::Fraction, true},
      {"ef_lvc", "EF_LVC", "fraction", FeatureKind::Fraction, false},
      {"r_rvclv_ed", "R_RVCLV,ED", "ratio", FeatureKind::Ratio, true},
      {"r_lvmlvc_ed", "R_LVMLVC,ED", "ratio", FeatureKind::Ratio, true},
      {"mt_lvm_ed", "MT_LVM,ED", "mm", FeatureKind::Thickness, true},
      {"rmd", "RMD", "dimensionless", FeatureKind::Motion, true},
      {"tmd", "TMD", "dimensionless", FeatureKind::Motion, true},
  });
  return catalog;
}

FeatureCatalog::FeatureCatalog(std::vector<FeatureDescriptor> entries)
    : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.name).second) {
      throw ValidationError("feature catalog: duplicate feature name '" + e.name + "'");
    }
  }
}

std::optional<std::size_t> FeatureCatalog::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t FeatureCatalog::require_index(std::string_view name) const {
  if (auto idx = index_of(name)) return *idx;
  throw ValidationError("unknown feature '" + std::string(name) + "'");
}

std::vector<std::string> FeatureCatalog::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::vector<std::string> FeatureCatalog::default_selection() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.selected_by_default) out.push_back(e.name);
  }
  return out;
}

bool is_fraction(FeatureKind kind) { return kind == FeatureKind::Fraction; }

}  // namespace cardio::cohort
