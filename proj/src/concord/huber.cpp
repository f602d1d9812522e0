#include "cardio/concord/huber.hpp"

#include <algorithm>
#include <cmath>

#include "cardio/errors.hpp"

namespace cardio::concord {

namespace {

void check(std::span<const double> x, std::span<const double> y, std::size_t min_points) {
  if (x.size() != y.size()) throw ValidationError("regression: x and y differ in length");
  if (x.size() < min_points) {
    throw ValidationError("regression: need at least " + std::to_string(min_points) + " points");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw ValidationError("regression: non-finite value");
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) throw ValidationError("regression: x is constant");
}

LineFit weighted_fit(std::span<const double> x, std::span<const double> y, const std::vector<double>& w) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericalError("regression: weighted x variance vanished");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)) + upper);
}

double robust_scale(const std::vector<double>& r) {
  const double m = median(r);
  std::vector<double> dev(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) dev[i] = std::abs(r[i] - m);
  return std::max(1.4826 * median(std::move(dev)), 1e-12);
}

}  // namespace

LineFit ols_fit(std::span<const double> x, std::span<const double> y) {
  check(x, y, 2);
  return weighted_fit(x, y, std::vector<double>(x.size(), 1.0));
}

HuberFit huber_fit(std::span<const double> x, std::span<const double> y, const HuberOptions& opt) {
  check(x, y, 3);
  if (!(opt.delta > 0.0)) throw ValidationError("huber: delta must be positive");
  if (!(opt.tol > 0.0)) throw ValidationError("huber: tol must be positive");
  if (opt.max_iter < 1) throw ValidationError("huber: max_iter must be positive");
  const std::size_t n = x.size();
  HuberFit fit;
  fit.weights.assign(n, 1.0);
  LineFit line = weighted_fit(x, y, fit.weights);
  std::vector<double> r(n);
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - (line.intercept + line.slope * x[i]);
    fit.scale = robust_scale(r);
    const double cut = opt.delta * fit.scale;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(r[i]);
      fit.weights[i] = a <= cut ? 1.0 : cut / a;
    }
    const LineFit next = weighted_fit(x, y, fit.weights);
    const double change = std::max(std::abs(next.slope - line.slope), std::abs(next.intercept - line.intercept));
    line = next;
    fit.iterations = it;
    if (change < opt.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  return fit;
}

}  // namespace cardio::concord
