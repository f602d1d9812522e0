#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "cardio/cohort/feature_table.hpp"
#include "cardio/concord/huber.hpp"
#include "cardio/embed/svg.hpp"
#include "json.hpp"

namespace cardio::concord {

struct MeasureComparison {
  cohort::ReferenceMeasure measure = cohort::ReferenceMeasure::LvcEd;
  std::size_t count = 0;
  double pipeline_mean = 0.0;
  double pipeline_sd = 0.0;  // sample SD
  double reference_mean = 0.0;
  double reference_sd = 0.0;
  double relative_difference = 0.0;  // reference_mean / pipeline_mean - 1
  HuberFit fit;                      // reference regressed on pipeline
  std::vector<double> pipeline;      // the compared values, row order
  std::vector<double> reference;
};

struct ConcordanceReport {
  std::size_t table_rows = 0;
  std::vector<std::size_t> complete_rows;
  std::array<MeasureComparison, cohort::kReferenceCount> measures;
};

/// reference_mean / pipeline_mean - 1. Throws ValidationError when the
/// pipeline mean is zero.
double relative_difference(double reference_mean, double pipeline_mean);

/// Compares pipeline LV measures (ED volume derived from ES and EF) with the
/// reference columns over rows where all three references are present.
/// Throws ValidationError with fewer than 3 complete rows.
ConcordanceReport summary_compare(const cohort::FeatureTable& table, const HuberOptions& options = {});

struct ScatterData {
  std::vector<double> x;
  std::vector<double> y;
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  LineFit regression;
  LineFit identity{1.0, 0.0};
};

/// Points plus the regression and identity lines, with ranges covering every
/// point. Throws ValidationError on length mismatch or no points.
ScatterData scatter_data(std::span<const double> x, std::span<const double> y, const HuberFit& fit);

/// Scatter CSV `x,y`; the two lines are described in the JSON report.
void write_scatter_csv(std::ostream& out, const ScatterData& data);

/// SVG figure: points, red regression line, black identity line.
embed::ScatterPlot scatter_plot(const ScatterData& data, const std::string& title);

std::string measure_name(cohort::ReferenceMeasure m);

nlohmann::json to_json(const ConcordanceReport& report);

}  // namespace cardio::concord
