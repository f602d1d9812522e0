#pragma once

#include <span>
#include <vector>

namespace cardio::concord {

struct HuberOptions {
  double delta = 1.345;
  double tol = 1e-8;
  int max_iter = 200;
};

struct HuberFit {
  double slope = 0.0;
  double intercept = 0.0;
  double scale = 0.0;  // 1.4826 * MAD of the final residuals, floored at 1e-12
  int iterations = 0;
  bool converged = false;
  std::vector<double> weights;  // in (0, 1]
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
/// Throws ValidationError for fewer than 2 points, length mismatch or
/// constant x.
LineFit ols_fit(std::span<const double> x, std::span<const double> y);

/// Huber M-estimate by iteratively reweighted least squares from the OLS
/// start. Each iteration rescales with 1.4826 * median |r - median r| and
/// sets weight min(1, delta * scale / |r|); it stops once neither
/// coefficient moves by tol or more. Throws ValidationError for fewer than
/// 3 points, length mismatch, non-finite values or constant x.
HuberFit huber_fit(std::span<const double> x, std::span<const double> y, const HuberOptions& options = {});

}  // namespace cardio::concord
