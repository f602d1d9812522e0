#include "cardio/analysis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "cardio/errors.hpp"

namespace cardio::analysis {

namespace {

// Continued fraction for I_x(a, b), valid when x < (a + 1) / (a + b + 2).
double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw NumericalError("incomplete beta: continued fraction did not converge");
}

// I_x(a, b) given both x and y = 1 - x, so callers can pass a complement
// that was computed without cancellation.
double ibeta_pair(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, y) / b;
}

void check_sample(std::span<const double> v, const char* name, std::size_t min_size) {
  if (v.size() < min_size) {
    throw ValidationError(std::string("sample ") + name + " needs at least " + std::to_string(min_size) + " values");
  }
  for (const double x : v) {
    if (!std::isfinite(x)) throw ValidationError(std::string("sample ") + name + " contains a non-finite value");
  }
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(std::span<const double> v, double mean) {
  double s = 0.0;
  for (const double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

// Midranks of the pooled sample (x first, then y).
std::vector<double> midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[idx[j + 1]] == pooled[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ValidationError("incomplete beta: a and b must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete beta: x must lie in [0, 1]");
  return ibeta_pair(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("student t: df must be positive");
  if (std::isnan(t)) throw ValidationError("student t: t is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  // P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return std::clamp(ibeta_pair(0.5 * df, 0.5, x, y), 0.0, 1.0);
}

WelchResult welch_t_test(std::span<const double> x, std::span<const double> y) {
  check_sample(x, "x", 2);
  check_sample(y, "y", 2);
  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  const double m1 = mean_of(x);
  const double m2 = mean_of(y);
  const double a = var_of(x, m1) / n1;
  const double b = var_of(y, m2) / n2;
  WelchResult r;
  if (a == 0.0 && b == 0.0) {
    r.degenerate = true;
    r.df = n1 + n2 - 2.0;
    if (m1 == m2) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = m1 > m2 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = (m1 - m2) / std::sqrt(a + b);
  r.df = (a + b) * (a + b) / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

MannWhitneyResult mann_whitney_u(std::span<const double> x, std::span<const double> y, MannWhitneyMethod method) {
  check_sample(x, "x", 1);
  check_sample(y, "y", 1);
  const std::size_t n1 = x.size();
  const std::size_t n2 = y.size();
  const std::size_t n = n1 + n2;
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::vector<double> ranks = midranks(pooled);

  double rx = 0.0;
  for (std::size_t i = 0; i < n1; ++i) rx += ranks[i];
  const double dn1 = static_cast<double>(n1);
  const double dn2 = static_cast<double>(n2);
  MannWhitneyResult r;
  r.u_x = rx - dn1 * (dn1 + 1.0) / 2.0;
  r.u_y = dn1 * dn2 - r.u_x;

  if (method == MannWhitneyMethod::Approximate) {
    const double mu = dn1 * dn2 / 2.0;
    // Tie correction: sum over tie groups of (t^3 - t).
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j < n && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double dn = static_cast<double>(n);
    const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (!(var > 0.0)) {
      r.p = 1.0;
      return r;
    }
    const double z = (std::abs(r.u_x - mu) - 0.5) / std::sqrt(var);
    r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
  }

  if (n > kMannWhitneyExactLimit) {
    throw ValidationError("exact Mann-Whitney enumeration supports at most " +
                          std::to_string(kMannWhitneyExactLimit) + " pooled values");
  }
  // Enumerate every n1-subset of pooled positions; compare U with tolerance
  // since midranks are multiples of 0.5.
  const double offset = dn1 * (dn1 + 1.0) / 2.0;
  std::size_t total = 0;
  std::size_t le = 0;
  std::size_t ge = 0;
  std::vector<std::size_t> pick(n1);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    double s = 0.0;
    for (const auto i : pick) s += ranks[i];
    const double u = s - offset;
    ++total;
    if (u <= r.u_x + 1e-9) ++le;
    if (u >= r.u_x - 1e-9) ++ge;
    // Next combination in lexicographic order.
    std::size_t i = n1;
    while (i > 0 && pick[i - 1] == n - n1 + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n1; ++j) pick[j] = pick[j - 1] + 1;
  }
  const double tail = static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
  r.p = std::min(1.0, 2.0 * tail);
  return r;
}

}  // namespace cardio::analysis
