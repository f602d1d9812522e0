#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cardio::cohort {

enum class FeatureKind { Volume, Fraction, Ratio, Thickness, Motion };

struct FeatureDescriptor {
  std::string name;    // CSV column name
  std::string symbol;  // conventional notation, e.g. "V_RVC,ED"
  std::string unit;
  FeatureKind kind;
  bool selected_by_default;
};

// Column positions of the nine image-derived features.
namespace feature {
inline constexpr std::size_t v_rvc_ed = 0;
inline constexpr std::size_t v_lvc_es = 1;
inline constexpr std::size_t ef_rvc = 2;
inline constexpr std::size_t ef_lvc = 3;
inline constexpr std::size_t r_rvclv_ed = 4;
inline constexpr std::size_t r_lvmlvc_ed = 5;
inline constexpr std::size_t mt_lvm_ed = 6;
inline constexpr std::size_t rmd = 7;
inline constexpr std::size_t tmd = 8;
}  // namespace feature

inline constexpr std::size_t kFeatureCount = 9;

class FeatureCatalog {
 public:
  /// The nine cardiac shape and motion features; every one except EF_LVC is
  /// selected by default.
  static const FeatureCatalog& standard();

  explicit FeatureCatalog(std::vector<FeatureDescriptor> entries);

  std::size_t size() const { return entries_.size(); }
  const FeatureDescriptor& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<FeatureDescriptor>& entries() const { return entries_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Like index_of, but throws ValidationError for unknown names.
  std::size_t require_index(std::string_view name) const;
  std::vector<std::string> names() const;
  std::vector<std::string> default_selection() const;

 private:
  std::vector<FeatureDescriptor> entries_;
};

/// Optional ground-truth measures that can accompany a feature table.
enum class ReferenceMeasure { LvcEd = 0, LvcEs = 1, EfLvc = 2 };
inline constexpr std::size_t kReferenceCount = 3;
inline constexpr std::array<std::string_view, kReferenceCount> kReferenceColumns = {
    "gt_v_lvc_ed", "gt_v_lvc_es", "gt_ef_lvc"};

bool is_fraction(FeatureKind kind);

}  // namespace cardio::cohort
