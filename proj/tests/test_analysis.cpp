#include <boost/math/special_functions/beta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cardio/analysis/model_choice.hpp"
#include "cardio/analysis/pairwise.hpp"
#include "cardio/analysis/pathology.hpp"
#include "cardio/analysis/stats.hpp"
#include "cardio/analysis/summary.hpp"
#include "cardio/errors.hpp"
#include "cardio/gmm/em.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cardio;
using namespace cardio::analysis;
namespace fe = cardio::cohort::feature;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Welch p-value evaluated entirely in 50-digit arithmetic.
double welch_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const auto moments = [](const std::vector<double>& v) {
    big m = 0;
    for (double a : v) m += a;
    m /= v.size();
    big s = 0;
    for (double a : v) s += (big(a) - m) * (big(a) - m);
    return std::pair{m, s / (v.size() - 1)};
  };
  const auto [mx, vx] = moments(x);
  const auto [my, vy] = moments(y);
  const big nx = x.size(), ny = y.size();
  const big se2 = vx / nx + vy / ny;
  const big t = (mx - my) / sqrt(se2);
  const big df = se2 * se2 / (vx * vx / (nx * nx * (nx - 1)) + vy * vy / (ny * ny * (ny - 1)));
  return static_cast<double>(boost::math::ibeta(df / 2, big(0.5), df / (df + t * t)));
}

// Exact two-sided Mann-Whitney p for distinct values by enumerating splits.
double exact_oracle(std::size_t n1, std::size_t n2, double u) {
  const std::size_t n = n1 + n2;
  std::size_t le = 0, ge = 0, total = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
    double rank_sum = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) rank_sum += static_cast<double>(i + 1);
    const double uu = rank_sum - static_cast<double>(n1 * (n1 + 1)) / 2.0;
    ++total;
    le += uu <= u ? 1 : 0;
    ge += uu >= u ? 1 : 0;
  }
  return std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total));
}

std::vector<double> unremarkable() { return testing::normal_row(); }

cohort::FeatureTable labelled_table(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), 9);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < 9; ++j) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return testing::table_from(v);
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("summary of a single cluster equals column statistics") {
  const Eigen::MatrixXd v = testing::plausible_rows(300, 1);
  const std::vector<std::size_t> labels(300, 0);
  const auto s = summarize_clusters(testing::table_from(v), labels);
  REQUIRE(s.size() == 1);
  CHECK(s[0].size == 300);
  REQUIRE(s[0].features.size() == 9);
  for (Eigen::Index j = 0; j < 9; ++j) {
    const auto& f = s[0].features[static_cast<std::size_t>(j)];
    CHECK(f.mean == doctest::Approx(v.col(j).mean()).epsilon(1e-13));
    const double sd = std::sqrt((v.col(j).array() - v.col(j).mean()).square().sum() / 299.0);
    CHECK(f.sd == doctest::Approx(sd).epsilon(1e-12));
    CHECK(f.min == v.col(j).minCoeff());
    CHECK(f.max == v.col(j).maxCoeff());
    CHECK(std::accumulate(f.histogram.counts.begin(), f.histogram.counts.end(), std::size_t{0}) == 300);
  }
}

TEST_CASE("summaries share histogram edges and cover every row") {
  const Eigen::MatrixXd v = testing::plausible_rows(200, 2);
  std::vector<std::size_t> labels(200);
  for (std::size_t i = 0; i < 200; ++i) labels[i] = i % 7 == 0 ? 4 : i % 3;
  const auto s = summarize_clusters(testing::table_from(v), labels);
  REQUIRE(s.size() == 4);  // cluster 3 is empty and omitted
  std::size_t total = 0;
  for (const auto& c : s) {
    total += c.size;
    CHECK(c.cluster != 3);
    for (std::size_t j = 0; j < 9; ++j) CHECK(c.features[j].histogram.edges == s[0].features[j].histogram.edges);
  }
  CHECK(total == 200);
  CHECK_THROWS_AS(summarize_clusters(testing::table_from(v), std::vector<std::size_t>(5, 0)), ValidationError);
}

TEST_CASE("freedman-diaconis edges") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
  const auto e = freedman_diaconis_edges(v);
  CHECK(e.front() <= 1.0);
  CHECK(e.back() >= 8.0);
  CHECK(std::is_sorted(e.begin(), e.end()));
  const auto c = histogram_counts(v, e);
  CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == 8);
  const std::vector<double> flat{3, 3, 3};
  const auto fe2 = freedman_diaconis_edges(flat);
  CHECK(fe2.size() == 2);
  CHECK(histogram_counts(flat, fe2)[0] == 3);
}

TEST_CASE("small-cluster threshold") {
  CHECK(small_threshold(3822, 0.02) == 76);
  CHECK(small_threshold(100, 0.02) == 2);
  CHECK_THROWS_AS(small_threshold(100, 0.0), ValidationError);
  CHECK_THROWS_AS(small_threshold(100, 1.0), ValidationError);

  std::vector<ClusterSummary> s(3);
  s[0].size = 76;
  s[1].size = 77;
  s[2].size = 3822 - 153;
  flag_small_clusters(s, 0.02);
  CHECK(s[0].small);
  CHECK_FALSE(s[1].small);
  CHECK_FALSE(s[2].small);

  std::vector<ClusterSummary> t(2);
  t[0].size = 90;
  t[1].size = 10;
  flag_small_clusters(t, 0.02);
  CHECK_FALSE(t[0].small);
  CHECK_FALSE(t[1].small);
}

TEST_CASE("small flag matches the threshold for random size splits") {
  cardio::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ClusterSummary> s(1 + rng.below(8));
    std::size_t n = 0;
    for (auto& c : s) n += c.size = 1 + rng.below(200);
    const double fraction = 0.01 + 0.2 * rng.uniform();
    flag_small_clusters(s, fraction);
    const auto th = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    for (const auto& c : s) CHECK(c.small == (c.size <= th));
  }
}

TEST_CASE("pathology examples") {
  auto rva = unremarkable();
  rva[fe::v_rvc_ed] = 133.13;
  rva[fe::ef_rvc] = 0.6361;
  auto p = match_pathology(rva);
  CHECK(p.contains(Pathology::RVA));
  CHECK_FALSE(p.contains(Pathology::DCM));

  auto dcm = unremarkable();
  dcm[fe::v_rvc_ed] = 90;
  dcm[fe::ef_rvc] = 0.55;
  dcm[fe::v_lvc_es] = 151.92;
  dcm[fe::ef_lvc] = 0.1974;
  dcm[fe::mt_lvm_ed] = 10;
  p = match_pathology(dcm);
  CHECK(p.contains(Pathology::DCM));
  CHECK_FALSE(p.contains(Pathology::RVA));
  CHECK_FALSE(p.contains(Pathology::HCM_partial));

  CHECK(match_pathology(unremarkable()).empty());

  auto hcm = unremarkable();
  hcm[fe::mt_lvm_ed] = 16;
  CHECK(match_pathology(hcm).contains(Pathology::HCM_partial));
  hcm[fe::mt_lvm_ed] = 15;  // strict
  CHECK(match_pathology(hcm).empty());

  auto bad = unremarkable();
  bad[fe::ef_lvc] = 1.0;
  CHECK_THROWS_AS(match_pathology(bad), ValidationError);

  PathologyRules r;
  r.dcm_ef = 1.5;
  CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("pathology matching is monotone") {
  cardio::Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    auto row = unremarkable();
    row[fe::v_rvc_ed] = 60 + 100 * rng.uniform();
    row[fe::ef_rvc] = 0.2 + 0.5 * rng.uniform();
    row[fe::v_lvc_es] = 20 + 120 * rng.uniform();
    row[fe::ef_lvc] = 0.1 + 0.6 * rng.uniform();
    const auto base = match_pathology(row);
    auto up = row;
    up[fe::v_rvc_ed] += 30 * rng.uniform();
    if (base.contains(Pathology::RVA)) CHECK(match_pathology(up).contains(Pathology::RVA));
    // The DCM volume is derived from V_LVC,ES and EF_LVC, so the derived ED
    // volume is what stays fixed while EF_LVC drops.
    auto down = row;
    const double ed = cohort::derive_lvc_ed_volume(row[fe::v_lvc_es], row[fe::ef_lvc]);
    down[fe::ef_lvc] -= 0.09 * rng.uniform();
    down[fe::v_lvc_es] = ed * (1.0 - down[fe::ef_lvc]);
    if (base.contains(Pathology::DCM)) CHECK(match_pathology(down).contains(Pathology::DCM));
  }
}

TEST_CASE("cluster pathology profiles") {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 11; ++i) {
    auto r = unremarkable();
    r[fe::v_rvc_ed] = 131 + i;
    rows.push_back(r);
    labels.push_back(0);
  }
  for (int i = 0; i < 20; ++i) {
    rows.push_back(unremarkable());
    labels.push_back(1);
  }
  for (int i = 0; i < 10; ++i) {
    auto r = unremarkable();
    if (i < 4) r[fe::v_rvc_ed] = 140;
    rows.push_back(r);
    labels.push_back(2);
  }
  const auto prof = cluster_pathology_profile(labelled_table(rows), labels);
  REQUIRE(prof.size() == 3);
  CHECK(prof[0].proportion[0] == 1.0);
  CHECK(prof[0].dominant == Pathology::RVA);
  CHECK(prof[1].proportion == std::array<double, 3>{0, 0, 0});
  CHECK_FALSE(prof[1].dominant);
  CHECK(prof[2].proportion[0] == doctest::Approx(0.4));
  CHECK_FALSE(prof[2].dominant);
  CHECK(to_json(prof[0])["dominant"] == "RVA");
}

TEST_CASE("incomplete beta against boost") {
  for (double a : {0.5, 1.0, 2.5, 30.0, 400.0})
    for (double b : {0.5, 1.0, 3.0})
      for (double x : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) {
        const double ref = static_cast<double>(boost::math::ibeta(big(a), big(b), big(x)));
        CHECK(std::abs(regularized_incomplete_beta(a, b, x) - ref) < 1e-12);
      }
  CHECK(regularized_incomplete_beta(2, 3, 0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 3, 1) == 1.0);
}

TEST_CASE("welch examples") {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 3, 4, 5, 6};
  const auto r = welch_t_test(x, y);
  CHECK(r.t == doctest::Approx(-1.0));
  CHECK(r.df == doctest::Approx(8.0));
  CHECK(std::abs(r.p - welch_oracle(x, y)) < 1e-9);
  const auto same = welch_t_test(x, x);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
  const std::vector<double> c1{2, 2, 2}, c2{3, 3};
  CHECK(welch_t_test(c1, c1).p == 1.0);
  CHECK(welch_t_test(c1, c1).degenerate);
  CHECK(welch_t_test(c1, c2).p == 0.0);
  CHECK(welch_t_test(c1, c2).degenerate);
  CHECK_THROWS_AS(welch_t_test(std::vector<double>{1}, x), ValidationError);
}

TEST_CASE("welch matches the extended-precision oracle") {
  cardio::Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto nx = 2 + rng.below(40), ny = 2 + rng.below(40);
    const auto x = testing::random_vector(nx, 1000 + trial, 0.0, 1.0 + rng.uniform());
    const auto y = testing::random_vector(ny, 2000 + trial, rng.normal(), 0.2 + 3 * rng.uniform());
    const auto r = welch_t_test(x, y);
    CHECK(std::abs(r.p - welch_oracle(x, y)) < 1e-9);
    CHECK(r.p >= 0.0);
    CHECK(r.p <= 1.0);
    const auto s = welch_t_test(y, x);
    CHECK(s.t == doctest::Approx(-r.t).epsilon(1e-12));
    CHECK(s.p == doctest::Approx(r.p).epsilon(1e-12));
  }
}

TEST_CASE("mann-whitney examples") {
  const std::vector<double> x{1, 2}, y{3, 4};
  const auto e = mann_whitney_u(x, y, MannWhitneyMethod::Exact);
  CHECK(e.u_x == 0.0);
  CHECK(e.p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto v = testing::random_vector(30, 4);
  CHECK(mann_whitney_u(v, v).p >= 0.99);
  CHECK(mann_whitney_u(v, v).u_x == 450.0);
  CHECK_THROWS_AS(mann_whitney_u(std::vector<double>{}, v), ValidationError);
}

TEST_CASE("mann-whitney U sums to n1 n2 with ties and is scale invariant") {
  cardio::Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n1 = 1 + rng.below(30), n2 = 1 + rng.below(30);
    std::vector<double> x(n1), y(n2);
    for (auto& a : x) a = static_cast<double>(rng.below(6));
    for (auto& a : y) a = static_cast<double>(rng.below(8));
    const auto r = mann_whitney_u(x, y);
    CHECK(r.u_x + r.u_y == static_cast<double>(n1 * n2));
    CHECK(r.p >= 0.0);
    CHECK(r.p <= 1.0);
    const double scale = 0.5 + 10 * rng.uniform();
    for (auto& a : x) a *= scale;
    for (auto& a : y) a *= scale;
    CHECK(mann_whitney_u(x, y).p == r.p);
  }
}

TEST_CASE("exact mann-whitney matches enumeration") {
  for (std::size_t n1 = 1; n1 < 10; ++n1) {
    const std::size_t n2 = 10 - n1;
    for (std::uint32_t mask = 0; mask < (1u << 10); mask += 7) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
      std::vector<double> x, y;
      for (int i = 0; i < 10; ++i) (mask >> i & 1u ? x : y).push_back(i + 1.0);
      const auto r = mann_whitney_u(x, y, MannWhitneyMethod::Exact);
      CHECK(r.p == doctest::Approx(exact_oracle(n1, n2, r.u_x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("normal approximation tracks the exact p when both samples have two or more values") {
  // Splits with a singleton sample are excluded here; see the acceptance suite.
  double worst = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << 10); ++mask) {
    const auto n1 = static_cast<std::size_t>(__builtin_popcount(mask));
    if (n1 < 2 || n1 > 8) continue;
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) (mask >> i & 1u ? x : y).push_back(i + 1.0);
    const double approx = mann_whitney_u(x, y).p;
    const double exact = mann_whitney_u(x, y, MannWhitneyMethod::Exact).p;
    worst = std::max(worst, std::abs(approx - exact));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("pairwise grid over seven clusters and eight features") {
  Eigen::MatrixXd v = testing::plausible_rows(700, 5);
  std::vector<std::size_t> labels(700);
  for (std::size_t i = 0; i < 700; ++i) {
    labels[i] = i % 7;
    v(static_cast<Eigen::Index>(i), fe::v_rvc_ed) += 10.0 * static_cast<double>(labels[i]);
  }
  const std::vector<std::size_t> clusters{0, 1, 2, 3, 4, 5, 6};
  const std::vector<std::size_t> features{0, 1, 2, 4, 5, 6, 7, 8};
  const auto m = pairwise_tests(testing::table_from(v), labels, clusters, features, 0.05, 2);
  CHECK(m.cells.size() == 168);
  CHECK(m.welch.below + m.welch.above == 168);
  CHECK(m.mann_whitney.below + m.mann_whitney.above == 168);
  CHECK(m.welch.below >= 21);
  for (const auto& c : m.cells) {
    REQUIRE(c.welch_p);
    CHECK(*c.welch_p >= 0.0);
    CHECK(*c.welch_p <= 1.0);
    if (c.feature == 0) CHECK(*c.welch_p < 1e-7);
  }
  const auto one = pairwise_tests(testing::table_from(v), labels, clusters, features, 0.05, 1);
  for (std::size_t i = 0; i < 168; ++i) CHECK(one.cells[i].welch_p == m.cells[i].welch_p);
  std::ostringstream csv;
  write_tests_csv(csv, m);
  CHECK(csv.str().rfind("cluster_a,cluster_b,feature,test,p\n", 0) == 0);
}

TEST_CASE("identical clusters give p = 1 and singletons are not computable") {
  Eigen::MatrixXd half = testing::plausible_rows(30, 6);
  Eigen::MatrixXd v(61, 9);
  v << half, half, testing::plausible_rows(1, 7);
  std::vector<std::size_t> labels(61, 0);
  for (std::size_t i = 30; i < 60; ++i) labels[i] = 1;
  labels[60] = 2;
  const std::vector<std::size_t> features{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const auto m = pairwise_tests(testing::table_from(v), labels, {0, 1}, features);
  for (const auto& c : m.cells) CHECK(*c.welch_p == 1.0);
  const auto s = pairwise_tests(testing::table_from(v), labels, {0, 2}, features);
  CHECK(s.welch.not_computable == 9);
  CHECK(s.welch.below + s.welch.above == 0);
  std::ostringstream csv;
  write_tests_csv(csv, s);
  CHECK(csv.str().find("NA") != std::string::npos);
}

TEST_CASE("model choice prefers small clusters within the BIC band") {
  Eigen::MatrixXd x = testing::random_normal(600, 2, 3);
  x.bottomRows(300).array() += 8.0;
  x.bottomRows(6).array() += 30.0;  // a planted small group
  gmm::BicSweep s;
  s.n = 600;
  for (std::size_t k = 1; k <= 4; ++k) {
    gmm::SweepEntry e;
    e.type = gmm::CovarianceType::Full;
    e.k = k;
    e.ok = true;
    e.model = gmm::fit_em(x, k, e.type, 4, {1e-6, 500, 1e-6, 3});
    e.bic = k == 2 ? 100.0 : (k == 3 ? 105.0 : 200.0);
    s.entries.push_back(std::move(e));
  }
  s.selected = 1;
  const auto wide = choose_model(s, x, 0.02, 10.0);
  CHECK(wide.k == 3);
  CHECK(wide.small_threshold == 12);
  CHECK(wide.candidates.size() == 2);
  const auto narrow = choose_model(s, x, 0.02, 1.0);
  CHECK(narrow.k == 2);
  CHECK(to_json(wide)["k"] == 3);
  CHECK_THROWS_AS(choose_model(s, x, 0.02, -1.0), ValidationError);
}

}  // TEST_SUITE
