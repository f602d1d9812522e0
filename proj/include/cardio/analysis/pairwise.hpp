#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cardio/cohort/feature_table.hpp"

namespace cardio::analysis {

struct TestCell {
  std::size_t cluster_a = 0;
  std::size_t cluster_b = 0;
  std::size_t feature = 0;           // catalog index
  std::optional<double> welch_p;     // empty when not computable
  std::optional<double> mann_whitney_p;
};

struct TestCounts {
  std::size_t below = 0;  // p < alpha
  std::size_t above = 0;
  std::size_t not_computable = 0;
};

struct TestMatrix {
  std::vector<std::size_t> clusters;
  std::vector<std::size_t> features;
  double alpha = 0.05;
  std::vector<TestCell> cells;  // pair-major (a < b in list order), then feature
  TestCounts welch;
  TestCounts mann_whitney;
};

/// Welch and Mann-Whitney tests for every pair of the listed clusters on
/// every listed feature. A cell whose clusters hold fewer than two members is
/// not computable and excluded from the counts. Cells may run concurrently;
/// results do not depend on `threads`.
///
/// Throws ValidationError for label/table length mismatch, duplicate or
/// unknown feature indices, alpha outside (0, 1) or fewer than two clusters.
TestMatrix pairwise_tests(const cohort::FeatureTable& table, std::span<const std::size_t> labels,
                          const std::vector<std::size_t>& clusters, const std::vector<std::size_t>& features,
                          double alpha = 0.05, unsigned threads = 1);

/// CSV `cluster_a,cluster_b,feature,test,p`, two rows per cell (welch then
/// mannwhitney); NA marks cells that could not be computed.
void write_tests_csv(std::ostream& out, const TestMatrix& matrix);

}  // namespace cardio::analysis
