#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardio/cohort/catalog.hpp"

namespace cardio::cohort {

using ReferenceColumn = std::vector<std::optional<double>>;

/// Case identifiers by nine features, plus optional ground-truth columns.
///
/// Validated on construction and immutable afterwards. Ejection fractions are
/// stored as fractions in [0, 1].
class FeatureTable {
 public:
  /// Throws ValidationError on duplicate ids, non-finite values, negative
  /// volumes or thicknesses, or fractions outside [0, 1]. Reference columns
  /// may be left empty (all missing) or must have one entry per row.
  FeatureTable(std::vector<std::string> case_ids, Eigen::MatrixXd values,
               std::array<ReferenceColumn, kReferenceCount> reference = {});

  std::size_t rows() const { return case_ids_.size(); }
  const std::vector<std::string>& case_ids() const { return case_ids_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double value(std::size_t row, std::size_t feature) const { return values_(row, feature); }
  Eigen::VectorXd column(std::size_t feature) const { return values_.col(feature); }

  /// Values restricted to the given feature columns, in the given order.
  Eigen::MatrixXd columns(std::span<const std::size_t> features) const;
  Eigen::MatrixXd columns(const std::vector<std::string>& names) const;

  bool has_reference_column(ReferenceMeasure m) const;
  std::optional<double> reference(std::size_t row, ReferenceMeasure m) const;
  /// Rows where all three reference measures are present.
  std::vector<std::size_t> complete_reference_rows() const;

 private:
  std::vector<std::string> case_ids_;
  Eigen::MatrixXd values_;
  std::array<ReferenceColumn, kReferenceCount> reference_;
};

/// V_LVC,ED recovered from V_LVC,ES and EF_LVC via EF = 1 - ES/ED.
/// Throws ValidationError unless 0 <= ef_lvc < 1 and v_lvc_es >= 0.
double derive_lvc_ed_volume(double v_lvc_es, double ef_lvc);

/// Reads the comma-separated format:
///   case_id,v_rvc_ed,...,tmd[,gt_v_lvc_ed,gt_v_lvc_es,gt_ef_lvc]
/// Columns are matched by name. Empty cells are allowed only in reference
/// columns and are kept as missing. Errors name the line and column.
FeatureTable load_feature_table(std::istream& in);
FeatureTable load_feature_table(const std::filesystem::path& path);

/// Writes the same format with 17 significant digits, so that loading the
/// output reproduces the table exactly. Reference columns are written when
/// any reference value is present.
void save_feature_table(const FeatureTable& table, std::ostream& out);
void save_feature_table(const FeatureTable& table, const std::filesystem::path& path);

/// Shortest-round-trip-safe text for a double (printf %.17g).
std::string format_double(double v);

}  // namespace cardio::cohort
