#pragma once

#include <cstddef>
#include <span>

namespace cardio::analysis {

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1],
/// by Lentz's continued fraction. Throws ValidationError on bad arguments.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided Student-t tail P(|T| >= |t|) with df > 0 degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool degenerate = false;  // both samples constant
};

/// Two-sided Welch test. With both samples constant: p = 1 when they are
/// equal and p = 0 otherwise, flagged degenerate. Throws ValidationError if
/// either sample has fewer than two values or contains non-finite values.
WelchResult welch_t_test(std::span<const double> x, std::span<const double> y);

enum class MannWhitneyMethod { Approximate, Exact };

struct MannWhitneyResult {
  double u_x = 0.0;  // rank sum of x minus n1(n1+1)/2
  double u_y = 0.0;
  double p = 1.0;
};

/// Largest pooled size accepted by the exact method.
inline constexpr std::size_t kMannWhitneyExactLimit = 20;

/// Two-sided Mann-Whitney U test with midranks for ties.
///
/// Approximate: normal approximation with tie-corrected variance and a 0.5
/// continuity correction, p clipped to 1. Exact: enumerates every split of the
/// pooled midranks and doubles the smaller tail, clipped to 1; requires
/// n1 + n2 <= kMannWhitneyExactLimit. Throws ValidationError on empty or
/// non-finite samples.
MannWhitneyResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                                 MannWhitneyMethod method = MannWhitneyMethod::Approximate);

}  // namespace cardio::analysis
