#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cardio::select {

/// Sample Pearson correlation. Throws ValidationError when the lengths differ,
/// there are fewer than 2 values, or either vector is constant.
double pearson(std::span<const double> x, std::span<const double> y);

struct MicOptions {
  double b_exponent = 0.6;  // grids limited to a*b <= max(n^b_exponent, 4)
  int clump_factor = 15;    // superclump budget per column
  // Row placements are enumerated exhaustively while their count for a
  // given row total stays within this limit; beyond it the rows are an
  // equal-frequency partition.
  std::size_t exhaustive_row_limit = 128;
};

/// Largest grid cell count considered for n samples.
std::size_t mic_grid_bound(std::size_t n, double b_exponent);

/// Maximal information coefficient (base-2 logarithms).
///
/// For each grid shape (a columns, b rows) with a, b >= 2 and a*b within the
/// grid bound, the best mutual information over placements with at most a
/// columns and b rows is normalized by log2(min(a, b)); the maximum over
/// shapes is returned. One axis is partitioned by candidate row placements,
/// the other is optimized exactly by dynamic programming over clumps, and
/// both orientations are evaluated, so the result is symmetric in x and y.
/// Grids depend only on ranks. Constant input gives 0.
/// Throws ValidationError for mismatched lengths or n < 4.
double mic(std::span<const double> x, std::span<const double> y, const MicOptions& options = {});

/// Normalized characteristic matrix: entry [a][b] for a*b within the bound,
/// 0 elsewhere (indices 0 and 1 unused).
std::vector<std::vector<double>> mic_characteristic_matrix(std::span<const double> x,
                                                           std::span<const double> y,
                                                           const MicOptions& options = {});

}  // namespace cardio::select
