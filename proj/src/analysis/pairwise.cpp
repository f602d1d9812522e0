#include "cardio/analysis/pairwise.hpp"

#include <algorithm>
#include <set>

#include "cardio/analysis/stats.hpp"
#include "cardio/errors.hpp"
#include "cardio/parallel.hpp"

namespace cardio::analysis {

namespace {

void tally(TestCounts& counts, const std::optional<double>& p, double alpha) {
  if (!p) {
    ++counts.not_computable;
  } else if (*p < alpha) {
    ++counts.below;
  } else {
    ++counts.above;
  }
}

}  // namespace

TestMatrix pairwise_tests(const cohort::FeatureTable& table, std::span<const std::size_t> labels,
                          const std::vector<std::size_t>& clusters, const std::vector<std::size_t>& features,
                          double alpha, unsigned threads) {
  if (labels.size() != table.rows()) throw ValidationError("assignment length does not match table rows");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (clusters.size() < 2) throw ValidationError("pairwise tests need at least two clusters");
  if (std::set<std::size_t>(clusters.begin(), clusters.end()).size() != clusters.size()) {
    throw ValidationError("pairwise tests: duplicate cluster index");
  }
  if (features.empty()) throw ValidationError("pairwise tests need at least one feature");
  if (std::set<std::size_t>(features.begin(), features.end()).size() != features.size()) {
    throw ValidationError("pairwise tests: duplicate feature");
  }
  for (const auto f : features) {
    if (f >= static_cast<std::size_t>(table.values().cols())) throw ValidationError("pairwise tests: unknown feature index");
  }

  // members[c][f] = values of feature f within cluster c.
  std::vector<std::vector<std::vector<double>>> members(clusters.size(),
                                                        std::vector<std::vector<double>>(features.size()));
  for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != clusters[ci]) continue;
      for (std::size_t fi = 0; fi < features.size(); ++fi) {
        members[ci][fi].push_back(table.value(i, features[fi]));
      }
    }
  }

  TestMatrix m;
  m.clusters = clusters;
  m.features = features;
  m.alpha = alpha;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    for (std::size_t b = a + 1; b < clusters.size(); ++b) pairs.emplace_back(a, b);
  }
  m.cells.resize(pairs.size() * features.size());
  parallel_for(m.cells.size(), threads, [&](std::size_t idx) {
    const auto [a, b] = pairs[idx / features.size()];
    const std::size_t fi = idx % features.size();
    TestCell& cell = m.cells[idx];
    cell.cluster_a = clusters[a];
    cell.cluster_b = clusters[b];
    cell.feature = features[fi];
    const auto& x = members[a][fi];
    const auto& y = members[b][fi];
    if (x.size() < 2 || y.size() < 2) return;
    cell.welch_p = welch_t_test(x, y).p;
    cell.mann_whitney_p = mann_whitney_u(x, y).p;
  });
  for (const auto& cell : m.cells) {
    tally(m.welch, cell.welch_p, alpha);
    tally(m.mann_whitney, cell.mann_whitney_p, alpha);
  }
  return m;
}

void write_tests_csv(std::ostream& out, const TestMatrix& matrix) {
  const auto& catalog = cohort::FeatureCatalog::standard();
  out << "cluster_a,cluster_b,feature,test,p\n";
  const auto emit = [&](const TestCell& c, const char* test, const std::optional<double>& p) {
    out << c.cluster_a << ',' << c.cluster_b << ',' << catalog[c.feature].name << ',' << test << ','
        << (p ? cohort::format_double(*p) : std::string("NA")) << '\n';
  };
  for (const auto& c : matrix.cells) {
    emit(c, "welch", c.welch_p);
    emit(c, "mannwhitney", c.mann_whitney_p);
  }
}

}  // namespace cardio::analysis
