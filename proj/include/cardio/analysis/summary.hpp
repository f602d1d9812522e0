#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cardio/cohort/feature_table.hpp"
#include "json.hpp"

namespace cardio::analysis {

struct Histogram {
  std::vector<double> edges;        // bins + 1 ascending edges
  std::vector<std::size_t> counts;  // one per bin
};

struct FeatureStats {
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n - 1); 0 for a single member
  double min = 0.0;
  double max = 0.0;
  Histogram histogram;
};

struct ClusterSummary {
  std::size_t cluster = 0;
  std::size_t size = 0;
  std::vector<FeatureStats> features;  // one per catalog feature
  bool small = false;
};

/// Freedman-Diaconis bin edges for pooled values (width 2 IQR n^(-1/3)),
/// capped at max_bins. Falls back to ceil(sqrt(n)) bins when the IQR is
/// zero, and to a single unit-wide bin when all values coincide.
std::vector<double> freedman_diaconis_edges(std::span<const double> values, std::size_t max_bins = 200);

/// Counts values into bins [e_i, e_{i+1}); the last bin is closed.
std::vector<std::size_t> histogram_counts(std::span<const double> values, const std::vector<double>& edges);

/// Summaries for every cluster with at least one member, ordered by cluster
/// index. Histogram edges are shared across clusters per feature. Small
/// flags are left unset. Throws ValidationError if labels.size() != rows.
std::vector<ClusterSummary> summarize_clusters(const cohort::FeatureTable& table, std::span<const std::size_t> labels);

/// floor(fraction * n). Throws ValidationError unless 0 < fraction < 1.
std::size_t small_threshold(std::size_t n, double fraction);

/// Sets small = (size <= floor(fraction * n)) where n is the sum of sizes.
void flag_small_clusters(std::vector<ClusterSummary>& summaries, double fraction);

nlohmann::json to_json(const ClusterSummary& summary);

}  // namespace cardio::analysis
