#include "cardio/analysis/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cardio/errors.hpp"

namespace cardio::analysis {

namespace {

// Linear interpolation between order statistics (type 7).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string display(double mean, double sd, bool percent) {
  char buf[64];
  if (percent) {
    std::snprintf(buf, sizeof buf, "%.2f%% (%.2f%%)", 100.0 * mean, 100.0 * sd);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f (%.2f)", mean, sd);
  }
  return buf;
}

}  // namespace

std::vector<double> freedman_diaconis_edges(std::span<const double> values, std::size_t max_bins) {
  if (values.empty()) throw ValidationError("histogram: no values");
  if (max_bins < 1) throw ValidationError("histogram: max_bins must be positive");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  if (!(hi > lo)) return {lo - 0.5, lo + 0.5};

  const double n = static_cast<double>(sorted.size());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  std::size_t bins = 0;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(n);
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  } else {
    bins = static_cast<std::size_t>(std::ceil(std::sqrt(n)));
  }
  bins = std::clamp<std::size_t>(bins, 1, max_bins);
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  edges.back() = hi;
  return edges;
}

std::vector<std::size_t> histogram_counts(std::span<const double> values, const std::vector<double>& edges) {
  if (edges.size() < 2) throw ValidationError("histogram: need at least two edges");
  const std::size_t bins = edges.size() - 1;
  std::vector<std::size_t> counts(bins, 0);
  for (const double v : values) {
    if (v < edges.front() || v > edges.back()) continue;
    // First edge strictly greater than v marks the bin end.
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t bin = static_cast<std::size_t>(it - edges.begin());
    bin = bin == 0 ? 0 : bin - 1;
    counts[std::min(bin, bins - 1)] += 1;
  }
  return counts;
}

std::vector<ClusterSummary> summarize_clusters(const cohort::FeatureTable& table, std::span<const std::size_t> labels) {
  if (labels.size() != table.rows()) {
    throw ValidationError("assignment has " + std::to_string(labels.size()) + " labels but the table has " +
                          std::to_string(table.rows()) + " rows");
  }
  const std::size_t n_clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::size_t>> members(n_clusters);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  const auto& values = table.values();
  const auto d = static_cast<std::size_t>(values.cols());
  std::vector<std::vector<double>> edges(d);
  for (std::size_t f = 0; f < d; ++f) {
    const Eigen::VectorXd col = values.col(static_cast<Eigen::Index>(f));
    edges[f] = freedman_diaconis_edges(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
  }

  std::vector<ClusterSummary> out;
  for (std::size_t c = 0; c < n_clusters; ++c) {
    if (members[c].empty()) continue;
    ClusterSummary s;
    s.cluster = c;
    s.size = members[c].size();
    for (std::size_t f = 0; f < d; ++f) {
      std::vector<double> xs;
      xs.reserve(s.size);
      for (const auto i : members[c]) xs.push_back(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)));
      FeatureStats st;
      double sum = 0.0;
      for (const double x : xs) sum += x;
      st.mean = sum / static_cast<double>(xs.size());
      double ss = 0.0;
      for (const double x : xs) ss += (x - st.mean) * (x - st.mean);
      st.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
      const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
      st.min = *mn;
      st.max = *mx;
      st.histogram.edges = edges[f];
      st.histogram.counts = histogram_counts(xs, edges[f]);
      s.features.push_back(std::move(st));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t small_threshold(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("small-fraction must lie in (0, 1)");
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
}

void flag_small_clusters(std::vector<ClusterSummary>& summaries, double fraction) {
  std::size_t n = 0;
  for (const auto& s : summaries) n += s.size;
  if (n == 0) throw ValidationError("cannot flag clusters of an empty cohort");
  const std::size_t threshold = small_threshold(n, fraction);
  for (auto& s : summaries) s.small = s.size <= threshold;
}

nlohmann::json to_json(const ClusterSummary& summary) {
  const auto& catalog = cohort::FeatureCatalog::standard();
  nlohmann::json j;
  j["cluster"] = summary.cluster;
  j["size"] = summary.size;
  j["small"] = summary.small;
  nlohmann::json features = nlohmann::json::object();
  for (std::size_t f = 0; f < summary.features.size(); ++f) {
    const auto& st = summary.features[f];
    const std::string name = f < catalog.size() ? catalog[f].name : "feature_" + std::to_string(f);
    const bool percent = f < catalog.size() && catalog[f].kind == cohort::FeatureKind::Fraction;
    features[name] = {{"mean", st.mean},
                      {"sd", st.sd},
                      {"min", st.min},
                      {"max", st.max},
                      {"display", display(st.mean, st.sd, percent)},
                      {"histogram", {{"edges", st.histogram.edges}, {"counts", st.histogram.counts}}}};
  }
  j["features"] = std::move(features);
  return j;
}

}  // namespace cardio::analysis
