#include "cardio/concord/concordance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cardio/errors.hpp"

namespace cardio::concord {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (const double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string display(double mean, double sd, bool percent) {
  char buf[64];
  if (percent) std::snprintf(buf, sizeof buf, "%.2f%% (%.2f%%)", 100.0 * mean, 100.0 * sd);
  else std::snprintf(buf, sizeof buf, "%.2f (%.2f)", mean, sd);
  return buf;
}

}  // namespace

double relative_difference(double reference_mean, double pipeline_mean) {
  if (pipeline_mean == 0.0) throw ValidationError("relative difference: pipeline mean is zero");
  return reference_mean / pipeline_mean - 1.0;
}

std::string measure_name(cohort::ReferenceMeasure m) {
  switch (m) {
    case cohort::ReferenceMeasure::LvcEd: return "v_lvc_ed";
    case cohort::ReferenceMeasure::LvcEs: return "v_lvc_es";
    case cohort::ReferenceMeasure::EfLvc: return "ef_lvc";
  }
  return "unknown";
}

ConcordanceReport summary_compare(const cohort::FeatureTable& table, const HuberOptions& options) {
  namespace fi = cohort::feature;
  ConcordanceReport report;
  report.table_rows = table.rows();
  report.complete_rows = table.complete_reference_rows();
  if (report.complete_rows.size() < 3) {
    throw ValidationError("concordance needs at least 3 rows with all reference values, found " +
                          std::to_string(report.complete_rows.size()));
  }
  constexpr std::array<cohort::ReferenceMeasure, cohort::kReferenceCount> order{
      cohort::ReferenceMeasure::LvcEd, cohort::ReferenceMeasure::LvcEs, cohort::ReferenceMeasure::EfLvc};
  for (std::size_t m = 0; m < order.size(); ++m) {
    MeasureComparison& c = report.measures[m];
    c.measure = order[m];
    for (const auto row : report.complete_rows) {
      const double es = table.value(row, fi::v_lvc_es);
      const double ef = table.value(row, fi::ef_lvc);
      double pipe = 0.0;
      switch (c.measure) {
        case cohort::ReferenceMeasure::LvcEd: pipe = cohort::derive_lvc_ed_volume(es, ef); break;
        case cohort::ReferenceMeasure::LvcEs: pipe = es; break;
        case cohort::ReferenceMeasure::EfLvc: pipe = ef; break;
      }
      c.pipeline.push_back(pipe);
      c.reference.push_back(*table.reference(row, c.measure));
    }
    c.count = c.pipeline.size();
    c.pipeline_mean = mean_of(c.pipeline);
    c.pipeline_sd = sd_of(c.pipeline, c.pipeline_mean);
    c.reference_mean = mean_of(c.reference);
    c.reference_sd = sd_of(c.reference, c.reference_mean);
    c.relative_difference = relative_difference(c.reference_mean, c.pipeline_mean);
    c.fit = huber_fit(c.pipeline, c.reference, options);
  }
  return report;
}

ScatterData scatter_data(std::span<const double> x, std::span<const double> y, const HuberFit& fit) {
  if (x.size() != y.size()) throw ValidationError("scatter: x and y differ in length");
  if (x.empty()) throw ValidationError("scatter: no points");
  ScatterData d;
  d.x.assign(x.begin(), x.end());
  d.y.assign(y.begin(), y.end());
  const auto [xl, xh] = std::minmax_element(d.x.begin(), d.x.end());
  const auto [yl, yh] = std::minmax_element(d.y.begin(), d.y.end());
  d.x_min = *xl;
  d.x_max = *xh;
  d.y_min = *yl;
  d.y_max = *yh;
  d.regression = {fit.slope, fit.intercept};
  return d;
}

void write_scatter_csv(std::ostream& out, const ScatterData& data) {
  out << "x,y\n";
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    out << cohort::format_double(data.x[i]) << ',' << cohort::format_double(data.y[i]) << '\n';
  }
}

embed::ScatterPlot scatter_plot(const ScatterData& data, const std::string& title) {
  embed::ScatterPlot plot;
  plot.title = title;
  plot.x_label = "automatic pipeline";
  plot.y_label = "reference";
  for (std::size_t i = 0; i < data.x.size(); ++i) plot.points.push_back({data.x[i], data.y[i], 0});
  const auto line = [&](const LineFit& f, const char* color, const char* label) {
    return embed::PlotLine{data.x_min, f.intercept + f.slope * data.x_min, data.x_max,
                           f.intercept + f.slope * data.x_max, color, label};
  };
  plot.lines.push_back(line(data.regression, "red", "robust regression"));
  plot.lines.push_back(line(data.identity, "black", "reference = pipeline"));
  return plot;
}

nlohmann::json to_json(const ConcordanceReport& report) {
  nlohmann::json measures = nlohmann::json::array();
  for (const auto& c : report.measures) {
    const bool percent = c.measure == cohort::ReferenceMeasure::EfLvc;
    measures.push_back({{"measure", measure_name(c.measure)},
                        {"count", c.count},
                        {"pipeline", {{"mean", c.pipeline_mean}, {"sd", c.pipeline_sd},
                                      {"display", display(c.pipeline_mean, c.pipeline_sd, percent)}}},
                        {"reference", {{"mean", c.reference_mean}, {"sd", c.reference_sd},
                                       {"display", display(c.reference_mean, c.reference_sd, percent)}}},
                        {"relative_difference", c.relative_difference},
                        {"huber",
                         {{"slope", c.fit.slope},
                          {"intercept", c.fit.intercept},
                          {"scale", c.fit.scale},
                          {"iterations", c.fit.iterations},
                          {"converged", c.fit.converged},
                          {"downweighted", std::count_if(c.fit.weights.begin(), c.fit.weights.end(),
                                                         [](double w) { return w < 1.0; })}}},
                        {"identity_line", {{"slope", 1.0}, {"intercept", 0.0}}}});
  }
  return {{"table_rows", report.table_rows}, {"complete_rows", report.complete_rows.size()}, {"measures", measures}};
}

}  // namespace cardio::concord
