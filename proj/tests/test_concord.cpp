#include <cmath>
#include <sstream>

#include "cardio/concord/concordance.hpp"
#include "cardio/concord/huber.hpp"
#include "cardio/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cardio;
using namespace cardio::concord;
namespace fe = cardio::cohort::feature;
using cohort::ReferenceMeasure;

namespace {

// Table whose reference columns equal the pipeline measures transformed by
// `ref(value, measure index)`; rows listed in `missing` lack every reference.
template <class F>
cohort::FeatureTable table_with_reference(const Eigen::MatrixXd& v, F ref, std::vector<std::size_t> missing = {}) {
  std::array<cohort::ReferenceColumn, cohort::kReferenceCount> cols;
  for (auto& c : cols) c.resize(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const auto r = static_cast<std::size_t>(i);
    if (std::find(missing.begin(), missing.end(), r) != missing.end()) continue;
    const double es = v(i, fe::v_lvc_es), ef = v(i, fe::ef_lvc);
    cols[0][r] = ref(cohort::derive_lvc_ed_volume(es, ef), 0);
    cols[1][r] = ref(es, 1);
    cols[2][r] = ref(ef, 2);
  }
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < v.rows(); ++i) ids.push_back("c" + std::to_string(i));
  return cohort::FeatureTable(ids, v, cols);
}

}  // namespace

TEST_SUITE("concord") {

TEST_CASE("huber recovers an exact line") {
  for (std::size_t n : {3u, 10u, 100u}) {
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(i) * 0.7 - 3.0;
      y[i] = 2.0 * x[i] + 1.0;
    }
    const auto f = huber_fit(x, y);
    CHECK(std::abs(f.slope - 2.0) < 1e-10);
    CHECK(std::abs(f.intercept - 1.0) < 1e-10);
    CHECK(f.converged);
    for (double w : f.weights) CHECK(w == 1.0);
  }
}

TEST_CASE("huber resists gross outliers where OLS does not") {
  std::vector<double> x, y;
  const auto noise = testing::random_vector(55, 3, 0.0, 0.5);
  for (int i = 0; i < 50; ++i) {
    x.push_back(i);
    y.push_back(i + noise[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < 5; ++i) {
    x.push_back(45 + i);
    y.push_back(45 + i + 1000.0);
  }
  const auto h = huber_fit(x, y);
  const auto o = ols_fit(x, y);
  CHECK(std::abs(h.slope - 1.0) < 0.05);
  CHECK(std::abs(o.slope - 1.0) > 0.2);
  for (std::size_t i = 50; i < 55; ++i) CHECK(h.weights[i] < 0.01);
  for (double w : h.weights) {
    CHECK(w > 0.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("huber equals OLS when every residual is inside the threshold") {
  // Residuals alternating +-1: MAD scale is 1.4826, all |r| <= 1.345 * 1.4826.
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i);
    y.push_back(3.0 - 0.5 * i + (i % 2 ? 1.0 : -1.0));
  }
  const auto h = huber_fit(x, y);
  const auto o = ols_fit(x, y);
  CHECK(std::abs(h.slope - o.slope) < 1e-10);
  CHECK(std::abs(h.intercept - o.intercept) < 1e-10);
  for (double w : h.weights) CHECK(w == 1.0);
}

TEST_CASE("huber is affine equivariant in y") {
  cardio::Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = testing::random_vector(60, 100 + trial);
    auto y = testing::random_vector(60, 200 + trial);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 1.5 * x[i] + (i % 11 == 0 ? 20.0 : 0.0);
    const double a = 0.2 + 5 * rng.uniform(), b = 50 * rng.normal();
    std::vector<double> ty(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ty[i] = a * y[i] + b;
    const auto f = huber_fit(x, y);
    const auto g = huber_fit(x, ty);
    CHECK(std::abs(g.slope - a * f.slope) < 1e-8);
    CHECK(std::abs(g.intercept - (a * f.intercept + b)) < 1e-8);
  }
}

TEST_CASE("huber input checks") {
  const std::vector<double> two{1, 2}, three{1, 2, 3}, flat{2, 2, 2};
  CHECK_THROWS_AS(huber_fit(two, two), ValidationError);
  CHECK_THROWS_AS(huber_fit(flat, three), ValidationError);
  CHECK_THROWS_AS(huber_fit(three, two), ValidationError);
  CHECK_THROWS_AS(ols_fit(flat, three), ValidationError);
}

TEST_CASE("relative difference examples") {
  CHECK(relative_difference(75.48, 70.56) == doctest::Approx(0.0697).epsilon(1e-3));
  CHECK(relative_difference(33.87, 24.06) == doctest::Approx(0.408).epsilon(1e-3));
  CHECK_THROWS_AS(relative_difference(1.0, 0.0), ValidationError);
}

TEST_CASE("identical reference gives a null report") {
  const auto t = table_with_reference(testing::plausible_rows(80, 1), [](double v, int) { return v; }, {3, 7});
  const auto r = summary_compare(t);
  CHECK(r.table_rows == 80);
  CHECK(r.complete_rows.size() == 78);
  for (const auto& m : r.measures) {
    CHECK(m.count == 78);
    CHECK(m.relative_difference == 0.0);
    CHECK(std::abs(m.fit.slope - 1.0) < 1e-10);
    CHECK(std::abs(m.fit.intercept) < 1e-8);
    CHECK(m.pipeline_sd == m.reference_sd);
  }
  const auto j = to_json(r);
  CHECK(j.dump().find("v_lvc_ed") != std::string::npos);
}

TEST_CASE("summary statistics use the derived ED volume and ignore row order") {
  const Eigen::MatrixXd v = testing::plausible_rows(60, 2);
  const auto ref = [](double x, int m) { return m == 2 ? x * 0.9 : x * 1.07 + 2.0; };
  const auto r = summary_compare(table_with_reference(v, ref));
  double ed = 0;
  for (Eigen::Index i = 0; i < 60; ++i) ed += v(i, fe::v_lvc_es) / (1.0 - v(i, fe::ef_lvc));
  ed /= 60;
  const auto& m = r.measures[0];
  CHECK(m.pipeline_mean == doctest::Approx(ed).epsilon(1e-12));
  CHECK(m.reference_mean == doctest::Approx(ed * 1.07 + 2.0).epsilon(1e-12));
  CHECK(m.relative_difference == doctest::Approx(m.reference_mean / m.pipeline_mean - 1.0).epsilon(1e-12));
  CHECK(m.fit.slope == doctest::Approx(1.07).epsilon(1e-9));

  const Eigen::MatrixXd rev = v.colwise().reverse();
  const auto s = summary_compare(table_with_reference(rev, ref));
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(s.measures[k].pipeline_mean == doctest::Approx(r.measures[k].pipeline_mean).epsilon(1e-13));
    CHECK(s.measures[k].reference_sd == doctest::Approx(r.measures[k].reference_sd).epsilon(1e-12));
    CHECK(s.measures[k].fit.slope == doctest::Approx(r.measures[k].fit.slope).epsilon(1e-9));
  }
}

TEST_CASE("too few complete rows is an error") {
  const Eigen::MatrixXd v = testing::plausible_rows(5, 3);
  const auto t = table_with_reference(v, [](double x, int) { return x; }, {0, 1, 2});
  CHECK_THROWS_AS(summary_compare(t), ValidationError);
  CHECK_THROWS_AS(summary_compare(testing::table_from(v)), ValidationError);
}

TEST_CASE("scatter data and plot") {
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(50 + i);
    y.push_back(50 + i + (i == 4 ? 300.0 : 0.0));
  }
  const auto fit = huber_fit(x, y);
  const auto d = scatter_data(x, y, fit);
  CHECK(d.x_min <= 50);
  CHECK(d.x_max >= 79);
  CHECK(d.y_max >= 354);
  CHECK(std::abs(d.regression.slope - 1.0) < 0.01);
  CHECK(d.identity.slope == 1.0);
  CHECK(d.identity.intercept == 0.0);
  std::ostringstream csv;
  write_scatter_csv(csv, d);
  CHECK(csv.str().rfind("x,y\n", 0) == 0);
  const auto plot = scatter_plot(d, "ED");
  CHECK(plot.points.size() == 30);
  REQUIRE(plot.lines.size() == 2);
  CHECK(plot.lines[0].color != plot.lines[1].color);
  CHECK_THROWS_AS(scatter_data(std::vector<double>{}, std::vector<double>{}, fit), ValidationError);

  std::vector<double> same(x);
  const auto d2 = scatter_data(same, same, huber_fit(same, same));
  CHECK(std::abs(d2.regression.slope - d2.identity.slope) < 1e-10);
  CHECK(std::abs(d2.regression.intercept - d2.identity.intercept) < 1e-8);
}

}  // TEST_SUITE
