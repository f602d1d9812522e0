#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

// Brute-force maximal information coefficient for tiny samples: every
// placement of at most a-1 column cuts and b-1 row cuts between distinct
// consecutive values is scored directly.
namespace testing {

inline std::vector<std::size_t> order_of(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return idx;
}

// Every partition of the sorted values into at most `parts` groups, as a
// group id per original index. Cuts are only allowed between distinct values.
inline std::vector<std::vector<int>> axis_partitions(std::span<const double> v, std::size_t parts) {
  const auto idx = order_of(v);
  std::vector<std::size_t> cut_positions;  // cut after sorted position p
  for (std::size_t p = 0; p + 1 < idx.size(); ++p) {
    if (v[idx[p]] != v[idx[p + 1]]) cut_positions.push_back(p);
  }
  std::vector<std::vector<int>> out;
  std::vector<std::size_t> chosen;
  const auto emit = [&]() {
    std::vector<int> group(v.size());
    int g = 0;
    std::size_t c = 0;
    for (std::size_t p = 0; p < idx.size(); ++p) {
      group[idx[p]] = g;
      if (c < chosen.size() && chosen[c] == p) {
        ++g;
        ++c;
      }
    }
    out.push_back(group);
  };
  const auto rec = [&](auto&& self, std::size_t start) -> void {
    emit();
    if (chosen.size() + 1 >= parts) return;
    for (std::size_t i = start; i < cut_positions.size(); ++i) {
      chosen.push_back(cut_positions[i]);
      self(self, i + 1);
      chosen.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

inline double mutual_information(const std::vector<int>& gx, const std::vector<int>& gy) {
  const int nx = *std::max_element(gx.begin(), gx.end()) + 1;
  const int ny = *std::max_element(gy.begin(), gy.end()) + 1;
  std::vector<double> joint(static_cast<std::size_t>(nx * ny), 0.0), px(nx, 0.0), py(ny, 0.0);
  const double n = static_cast<double>(gx.size());
  for (std::size_t i = 0; i < gx.size(); ++i) {
    joint[static_cast<std::size_t>(gx[i] * ny + gy[i])] += 1.0 / n;
    px[gx[i]] += 1.0 / n;
    py[gy[i]] += 1.0 / n;
  }
  double mi = 0.0;
  for (int a = 0; a < nx; ++a)
    for (int b = 0; b < ny; ++b) {
      const double p = joint[static_cast<std::size_t>(a * ny + b)];
      if (p > 0.0) mi += p * std::log2(p / (px[a] * py[b]));
    }
  return mi;
}

inline std::size_t oracle_bound(std::size_t n, double exponent) {
  return static_cast<std::size_t>(std::floor(std::max(std::pow(static_cast<double>(n), exponent), 4.0)));
}

inline double brute_force_mic(std::span<const double> x, std::span<const double> y, double exponent = 0.6) {
  const std::size_t bound = oracle_bound(x.size(), exponent);
  double best = 0.0;
  for (std::size_t a = 2; a <= bound / 2; ++a) {
    for (std::size_t b = 2; a * b <= bound; ++b) {
      const auto px = axis_partitions(x, a);
      const auto py = axis_partitions(y, b);
      double top = 0.0;
      for (const auto& gx : px)
        for (const auto& gy : py) top = std::max(top, mutual_information(gx, gy));
      best = std::max(best, top / std::log2(static_cast<double>(std::min(a, b))));
    }
  }
  return best;
}

}  // namespace testing
