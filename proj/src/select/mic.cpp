#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cardio/errors.hpp"
#include "cardio/select/dependence.hpp"

namespace cardio::select {

namespace {

// Points of one axis in ascending order, grouped by equal value.
struct Axis {
  std::vector<std::size_t> order;
  std::vector<std::size_t> group_start;  // one entry per group plus an end sentinel

  std::size_t groups() const { return group_start.size() - 1; }
  std::size_t group_size(std::size_t g) const { return group_start[g + 1] - group_start[g]; }
};

Axis make_axis(std::span<const double> v) {
  Axis axis;
  axis.order.resize(v.size());
  std::iota(axis.order.begin(), axis.order.end(), std::size_t{0});
  std::stable_sort(axis.order.begin(), axis.order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  for (std::size_t i = 0; i < axis.order.size(); ++i) {
    if (i == 0 || v[axis.order[i]] != v[axis.order[i - 1]]) axis.group_start.push_back(i);
  }
  axis.group_start.push_back(v.size());
  return axis;
}

// Row label of every point, and the number of rows used.
struct RowPartition {
  std::vector<int> row_of;
  int rows = 0;
};

// Groups items of the given sizes into at most `target` contiguous bins of
// roughly equal mass; returns the bin of each item.
std::vector<int> equipartition_sizes(const std::vector<std::size_t>& sizes, std::size_t target) {
  std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<int> bin(sizes.size());
  int current = 0;
  double current_size = 0.0;
  double desired = static_cast<double>(total) / static_cast<double>(target);
  std::size_t consumed = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const double s = static_cast<double>(sizes[g]);
    if (current_size != 0.0 && static_cast<std::size_t>(current) + 1 < target &&
        std::abs(current_size + s - desired) >= std::abs(current_size - desired)) {
      ++current;
      current_size = 0.0;
      desired = static_cast<double>(total - consumed) / static_cast<double>(target - static_cast<std::size_t>(current));
    }
    bin[g] = current;
    current_size += s;
    consumed += sizes[g];
  }
  return bin;
}

RowPartition partition_from_groups(const Axis& axis, const std::vector<int>& group_row, std::size_t n) {
  RowPartition p;
  p.row_of.assign(n, 0);
  for (std::size_t g = 0; g < axis.groups(); ++g) {
    for (std::size_t i = axis.group_start[g]; i < axis.group_start[g + 1]; ++i) {
      p.row_of[axis.order[i]] = group_row[g];
    }
  }
  p.rows = group_row.empty() ? 0 : group_row.back() + 1;
  return p;
}

double binomial_capped(std::size_t n, std::size_t k, double cap) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (c > cap) return c;
  }
  return c;
}

// Candidate row placements with exactly `rows` rows (or one equal-frequency
// placement when enumeration would exceed the limit).
std::vector<RowPartition> row_candidates(const Axis& axis, std::size_t n, std::size_t rows, std::size_t limit) {
  std::vector<RowPartition> out;
  const std::size_t groups = axis.groups();
  if (groups < rows) return out;
  const double count = binomial_capped(groups - 1, rows - 1, static_cast<double>(limit) + 1.0);
  if (count <= static_cast<double>(limit)) {
    // cuts[c] = index of the first group of row c + 1
    std::vector<std::size_t> cuts(rows - 1);
    std::iota(cuts.begin(), cuts.end(), std::size_t{1});
    std::vector<int> group_row(groups);
    while (true) {
      int row = 0;
      std::size_t next = 0;
      for (std::size_t g = 0; g < groups; ++g) {
        if (next < cuts.size() && g == cuts[next]) {
          ++row;
          ++next;
        }
        group_row[g] = row;
      }
      out.push_back(partition_from_groups(axis, group_row, n));
      // Advance to the next combination of cut positions in [1, groups - 1].
      std::size_t c = cuts.size();
      while (c > 0 && cuts[c - 1] == groups - 1 - (cuts.size() - c)) --c;
      if (c == 0) break;
      ++cuts[c - 1];
      for (std::size_t i = c; i < cuts.size(); ++i) cuts[i] = cuts[i - 1] + 1;
    }
    return out;
  }
  std::vector<std::size_t> sizes(groups);
  for (std::size_t g = 0; g < groups; ++g) sizes[g] = axis.group_size(g);
  out.push_back(partition_from_groups(axis, equipartition_sizes(sizes, rows), n));
  return out;
}

class ColumnOptimizer {
 public:
  explicit ColumnOptimizer(std::size_t n) : xlogx_(n + 1, 0.0) {
    for (std::size_t c = 1; c <= n; ++c) {
      const double v = static_cast<double>(c);
      xlogx_[c] = v * std::log2(v);
    }
  }

  // Best mutual information (bits) between the fixed rows and a partition of
  // `axis` into exactly l columns, for l = 0..max_cols (entry l); -inf when
  // no such partition exists.
  std::vector<double> optimize(const Axis& axis, const RowPartition& q, std::size_t max_cols, int clump_factor) {
    const std::size_t n = axis.order.size();
    const auto rows = static_cast<std::size_t>(q.rows);

    // Clumps: maximal runs of tie groups whose points all share one row.
    // An optimal partition never cuts inside a clump.
    std::vector<std::size_t> clump_sizes;
    std::vector<std::vector<std::size_t>> clump_counts;
    int open_row = -1;
    for (std::size_t g = 0; g < axis.groups(); ++g) {
      std::vector<std::size_t> counts(rows, 0);
      for (std::size_t i = axis.group_start[g]; i < axis.group_start[g + 1]; ++i) {
        counts[static_cast<std::size_t>(q.row_of[axis.order[i]])] += 1;
      }
      int pure_row = -1;
      for (std::size_t r = 0; r < rows; ++r) {
        if (counts[r] == axis.group_size(g)) pure_row = static_cast<int>(r);
      }
      if (pure_row >= 0 && pure_row == open_row) {
        clump_sizes.back() += axis.group_size(g);
        clump_counts.back()[static_cast<std::size_t>(pure_row)] += axis.group_size(g);
      } else {
        clump_sizes.push_back(axis.group_size(g));
        clump_counts.push_back(std::move(counts));
      }
      open_row = pure_row;
    }

    const std::size_t budget = static_cast<std::size_t>(clump_factor) * max_cols;
    if (clump_sizes.size() > budget) {
      const auto bin = equipartition_sizes(clump_sizes, budget);
      std::vector<std::size_t> merged_sizes;
      std::vector<std::vector<std::size_t>> merged_counts;
      for (std::size_t c = 0; c < clump_sizes.size(); ++c) {
        if (c == 0 || bin[c] != bin[c - 1]) {
          merged_sizes.push_back(0);
          merged_counts.emplace_back(rows, 0);
        }
        merged_sizes.back() += clump_sizes[c];
        for (std::size_t r = 0; r < rows; ++r) merged_counts.back()[r] += clump_counts[c][r];
      }
      clump_sizes = std::move(merged_sizes);
      clump_counts = std::move(merged_counts);
    }

    const std::size_t k = clump_sizes.size();
    // Prefix counts over clumps.
    std::vector<std::size_t> cum_total(k + 1, 0);
    std::vector<std::size_t> cum_rows((k + 1) * rows, 0);
    for (std::size_t t = 0; t < k; ++t) {
      cum_total[t + 1] = cum_total[t] + clump_sizes[t];
      for (std::size_t r = 0; r < rows; ++r) {
        cum_rows[(t + 1) * rows + r] = cum_rows[t * rows + r] + clump_counts[t][r];
      }
    }
    // cost[t][s]: n_col * H(rows | column spanning clumps s..t-1), in bits.
    std::vector<double> cost((k + 1) * (k + 1), 0.0);
    for (std::size_t t = 1; t <= k; ++t) {
      for (std::size_t s = 0; s < t; ++s) {
        double c = xlogx_[cum_total[t] - cum_total[s]];
        for (std::size_t r = 0; r < rows; ++r) {
          c -= xlogx_[cum_rows[t * rows + r] - cum_rows[s * rows + r]];
        }
        cost[t * (k + 1) + s] = c;
      }
    }

    // Row entropy over all points.
    double h_rows = xlogx_[n];
    for (std::size_t r = 0; r < rows; ++r) h_rows -= xlogx_[cum_rows[k * rows + r]];
    h_rows /= static_cast<double>(n);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> result(max_cols + 1, -inf);
    const std::size_t max_l = std::min(max_cols, k);
    std::vector<double> prev(k + 1, inf), curr(k + 1, inf);
    for (std::size_t t = 1; t <= k; ++t) prev[t] = cost[t * (k + 1)];
    result[1] = h_rows - prev[k] / static_cast<double>(n);
    for (std::size_t l = 2; l <= max_l; ++l) {
      std::fill(curr.begin(), curr.end(), inf);
      for (std::size_t t = l; t <= k; ++t) {
        const double* row_cost = &cost[t * (k + 1)];
        double best = inf;
        for (std::size_t s = l - 1; s < t; ++s) {
          const double v = prev[s] + row_cost[s];
          if (v < best) best = v;
        }
        curr[t] = best;
      }
      std::swap(prev, curr);
      result[l] = h_rows - prev[k] / static_cast<double>(n);
    }
    return result;
  }

 private:
  std::vector<double> xlogx_;
};

// Raw mutual information, indexed [columns][rows], over placements where the
// rows come from `row_axis` candidates and the columns are optimized along
// `col_axis`.
void accumulate_orientation(const Axis& row_axis, const Axis& col_axis, std::size_t n, std::size_t bound,
                            const MicOptions& options, ColumnOptimizer& optimizer, bool transpose,
                            std::vector<std::vector<double>>& best) {
  for (std::size_t rows = 2; rows * 2 <= bound; ++rows) {
    const std::size_t max_cols = bound / rows;
    for (const auto& q : row_candidates(row_axis, n, rows, options.exhaustive_row_limit)) {
      if (q.rows < 2) continue;
      const auto info = optimizer.optimize(col_axis, q, max_cols, options.clump_factor);
      const auto r = static_cast<std::size_t>(q.rows);
      for (std::size_t cols = 2; cols <= max_cols; ++cols) {
        if (!std::isfinite(info[cols])) continue;
        double& cell = transpose ? best[r][cols] : best[cols][r];
        cell = std::max(cell, info[cols]);
      }
    }
  }
}

}  // namespace

std::size_t mic_grid_bound(std::size_t n, double b_exponent) {
  const double b = std::max(std::pow(static_cast<double>(n), b_exponent), 4.0);
  return static_cast<std::size_t>(std::floor(b));
}

std::vector<std::vector<double>> mic_characteristic_matrix(std::span<const double> x, std::span<const double> y,
                                                           const MicOptions& options) {
  if (x.size() != y.size()) throw ValidationError("mic: vectors differ in length");
  if (x.size() < 4) throw ValidationError("mic: need at least 4 samples");
  if (options.clump_factor < 1) throw ValidationError("mic: clump_factor must be positive");
  const std::size_t n = x.size();
  const std::size_t bound = mic_grid_bound(n, options.b_exponent);

  const Axis ax = make_axis(x);
  const Axis ay = make_axis(y);
  ColumnOptimizer optimizer(n);
  std::vector<std::vector<double>> best(bound + 1, std::vector<double>(bound + 1, 0.0));
  accumulate_orientation(ay, ax, n, bound, options, optimizer, false, best);
  accumulate_orientation(ax, ay, n, bound, options, optimizer, true, best);

  // A grid with fewer columns or rows is also a grid of the larger shape with
  // empty cells, so the best information is monotone in both directions.
  for (std::size_t a = 2; a <= bound; ++a) {
    for (std::size_t b = 2; a * b <= bound; ++b) {
      if (a > 2) best[a][b] = std::max(best[a][b], best[a - 1][b]);
      if (b > 2) best[a][b] = std::max(best[a][b], best[a][b - 1]);
    }
  }
  std::vector<std::vector<double>> normalized(bound + 1, std::vector<double>(bound + 1, 0.0));
  for (std::size_t a = 2; a <= bound; ++a) {
    for (std::size_t b = 2; a * b <= bound; ++b) {
      normalized[a][b] = std::max(0.0, best[a][b]) / std::log2(static_cast<double>(std::min(a, b)));
    }
  }
  return normalized;
}

double mic(std::span<const double> x, std::span<const double> y, const MicOptions& options) {
  const auto m = mic_characteristic_matrix(x, y, options);
  double out = 0.0;
  for (const auto& row : m) {
    for (double v : row) out = std::max(out, v);
  }
  return out;
}

}  // namespace cardio::select
