#include <cmath>
#include <set>
#include <sstream>

#include "cardio/cohort/catalog.hpp"
#include "cardio/cohort/feature_table.hpp"
#include "cardio/cohort/simulate.hpp"
#include "cardio/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cardio;
using namespace cardio::cohort;

namespace {

const char* kHeader = "case_id,v_rvc_ed,v_lvc_es,ef_rvc,ef_lvc,r_rvclv_ed,r_lvmlvc_ed,mt_lvm_ed,rmd,tmd";

std::string message_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    load_feature_table(in);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("cohort") {

TEST_CASE("catalog has nine unique features and only EF_LVC is deselected") {
  const auto& cat = FeatureCatalog::standard();
  REQUIRE(cat.size() == 9);
  std::set<std::string> names;
  int deselected = 0;
  for (const auto& e : cat.entries()) {
    names.insert(e.name);
    if (!e.selected_by_default) {
      ++deselected;
      CHECK(e.name == "ef_lvc");
    }
  }
  CHECK(names.size() == 9);
  CHECK(deselected == 1);
  CHECK(cat.default_selection().size() == 8);
  CHECK(cat[feature::mt_lvm_ed].unit == "mm");
  CHECK_THROWS_AS(FeatureCatalog({{"a", "A", "", FeatureKind::Ratio, true}, {"a", "B", "", FeatureKind::Ratio, true}}),
                  ValidationError);
}

TEST_CASE("three-row CSV loads") {
  std::istringstream in(std::string(kHeader) +
                        "\n1,80,28,0.55,0.6,1.1,0.8,9,0.3,0.4\n2,81,29,0.56,0.61,1.2,0.9,9.5,0.31,0.41\n"
                        "3,150,30,0.5,0.62,1.3,0.85,10,0.2,0.3\n");
  const auto t = load_feature_table(in);
  CHECK(t.rows() == 3);
  CHECK(t.values().cols() == 9);
  CHECK(t.case_ids()[2] == "3");
  CHECK(t.value(2, feature::v_rvc_ed) == 150.0);
  CHECK_FALSE(t.has_reference_column(ReferenceMeasure::LvcEd));
}

TEST_CASE("columns are matched by name, not position") {
  std::istringstream in("tmd,rmd,mt_lvm_ed,r_lvmlvc_ed,r_rvclv_ed,ef_lvc,ef_rvc,v_lvc_es,v_rvc_ed,case_id\n"
                        "0.4,0.3,9,0.8,1.1,0.6,0.55,28,80,a\n0.41,0.31,9.5,0.9,1.2,0.61,0.56,29,81,b\n");
  const auto t = load_feature_table(in);
  CHECK(t.value(0, feature::v_rvc_ed) == 80.0);
  CHECK(t.value(1, feature::tmd) == 0.41);
}

TEST_CASE("EF_LVC above 1 is a range error naming the cell") {
  const auto msg = message_of(std::string(kHeader) + "\n1,80,28,0.55,1.2,1.1,0.8,9,0.3,0.4\n2,80,28,0.55,0.6,1.1,0.8,9,0.3,0.4\n");
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(msg.find("ef_lvc") != std::string::npos);
}

TEST_CASE("load errors name row and column") {
  const std::string row = "80,28,0.55,0.6,1.1,0.8,9,0.3,0.4";
  CHECK(message_of(std::string(kHeader) + "\n1," + row + "\n1," + row + "\n").find("duplicate case_id") !=
        std::string::npos);
  CHECK(message_of(std::string(kHeader) + "\n1,abc,28,0.55,0.6,1.1,0.8,9,0.3,0.4\n2," + row + "\n")
            .find("v_rvc_ed") != std::string::npos);
  CHECK(message_of(std::string(kHeader) + "\n1,inf,28,0.55,0.6,1.1,0.8,9,0.3,0.4\n2," + row + "\n")
            .find("not finite") != std::string::npos);
  CHECK(message_of(std::string(kHeader) + ",extra\n1," + row + ",1\n2," + row + ",1\n").find("unknown column 'extra'") !=
        std::string::npos);
  CHECK(message_of("case_id,v_rvc_ed\n1,2\n").find("missing required column") != std::string::npos);
  CHECK(message_of(std::string(kHeader) + "\n1,80,-28,0.55,0.6,1.1,0.8,9,0.3,0.4\n2," + row + "\n")
            .find("v_lvc_es") != std::string::npos);
  CHECK(message_of(std::string(kHeader) + "\n1,,28,0.55,0.6,1.1,0.8,9,0.3,0.4\n2," + row + "\n")
            .find("missing value") != std::string::npos);
  CHECK(message_of("").find("header") != std::string::npos);
}

TEST_CASE("missing reference cells are kept missing") {
  std::istringstream in(std::string(kHeader) +
                        ",gt_v_lvc_ed,gt_v_lvc_es,gt_ef_lvc\n"
                        "1,80,28,0.55,0.6,1.1,0.8,9,0.3,0.4,70,28,0.6\n"
                        "2,80,28,0.55,0.6,1.1,0.8,9,0.3,0.4,,27,0.6\n"
                        "3,80,28,0.55,0.6,1.1,0.8,9,0.3,0.4,71,29,0.59\n");
  const auto t = load_feature_table(in);
  CHECK(t.has_reference_column(ReferenceMeasure::LvcEd));
  CHECK_FALSE(t.reference(1, ReferenceMeasure::LvcEd).has_value());
  CHECK(t.reference(1, ReferenceMeasure::LvcEs).value() == 27.0);
  CHECK(t.complete_reference_rows() == std::vector<std::size_t>{0, 2});
}

TEST_CASE("derive_lvc_ed_volume") {
  CHECK(derive_lvc_ed_volume(100.0, 0.5) == 200.0);
  CHECK(derive_lvc_ed_volume(42.0, 0.0) == 42.0);
  // Forward check: EF = 1 - ES/ED reproduces the tabulated 19.74% at ED 189.28.
  const double ed = derive_lvc_ed_volume(151.92, 0.1974);
  CHECK(std::abs(ed - 189.28) < 0.02);
  CHECK(std::abs(1.0 - 151.92 / ed - 0.1974) < 1e-12);
  CHECK_THROWS_AS(derive_lvc_ed_volume(10.0, 1.0), ValidationError);
  CHECK_THROWS_AS(derive_lvc_ed_volume(10.0, -0.1), ValidationError);
  CHECK_THROWS_AS(derive_lvc_ed_volume(-1.0, 0.5), ValidationError);
}

TEST_CASE("save then load is the identity") {
  auto spec = paper_shape_spec(7);
  spec.total_n = 300;
  const auto sim = simulate_cohort(spec);
  std::stringstream buf;
  save_feature_table(sim.table, buf);
  const auto back = load_feature_table(buf);
  REQUIRE(back.rows() == sim.table.rows());
  CHECK(back.case_ids() == sim.table.case_ids());
  CHECK((back.values().array() == sim.table.values().array()).all());
  for (std::size_t r = 0; r < back.rows(); ++r) {
    for (std::size_t m = 0; m < kReferenceCount; ++m) {
      const auto a = back.reference(r, static_cast<ReferenceMeasure>(m));
      const auto b = sim.table.reference(r, static_cast<ReferenceMeasure>(m));
      REQUIRE(a.has_value() == b.has_value());
      if (a) CHECK(*a == *b);
    }
  }
}

TEST_CASE("one component with zero spread reproduces its mean") {
  CohortSpec spec;
  spec.total_n = 5;
  spec.redundant_ef_lvc = false;
  ComponentSpec c;
  c.label = "flat";
  c.weight = 1.0;
  c.mean = Eigen::Map<const Eigen::VectorXd>(testing::normal_row().data(), 9);
  c.sd = Eigen::VectorXd::Zero(9);
  spec.components.push_back(c);
  const auto sim = simulate_cohort(spec);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t f = 0; f < 9; ++f) CHECK(sim.table.value(r, f) == c.mean(static_cast<Eigen::Index>(f)));
}

TEST_CASE("simulation is deterministic for a seed") {
  auto spec = paper_shape_spec(11);
  spec.total_n = 500;
  const auto a = simulate_cohort(spec);
  const auto b = simulate_cohort(spec);
  std::ostringstream sa, sb;
  save_feature_table(a.table, sa);
  save_feature_table(b.table, sb);
  CHECK(sa.str() == sb.str());
  CHECK(a.labels == b.labels);
  spec.seed = 12;
  std::ostringstream sc;
  save_feature_table(simulate_cohort(spec).table, sc);
  CHECK(sc.str() != sa.str());
}

TEST_CASE("redundant EF_LVC follows the volume relation exactly without noise") {
  auto spec = paper_shape_spec(3);
  spec.total_n = 400;
  spec.ef_lvc_noise_sd = 0.0;
  const auto sim = simulate_cohort(spec);
  for (std::size_t r = 0; r < sim.table.rows(); ++r) {
    const double ef = sim.table.value(r, feature::ef_lvc);
    CHECK(std::abs(ef - (1.0 - sim.table.value(r, feature::v_lvc_es) / sim.lvc_ed[r])) < 1e-12);
  }
}

TEST_CASE("paper-shape spec plants 11- and 4-case components exactly") {
  const auto spec = paper_shape_spec();
  CHECK(spec.total_n == 3822);
  CHECK(spec.components.size() == 9);
  const auto sim = simulate_cohort(spec);
  std::vector<std::size_t> counts(spec.components.size(), 0);
  for (const auto l : sim.labels) ++counts[l];
  CHECK(counts[7] == 11);
  CHECK(counts[8] == 4);
  for (std::size_t j = 0; j < 7; ++j) CHECK(counts[j] > 200);
  // Planted right-ventricle volumes in the tabulated range.
  for (std::size_t r = 0; r < sim.labels.size(); ++r) {
    if (sim.labels[r] == 7) CHECK(sim.table.value(r, feature::v_rvc_ed) > 110.0);
  }
}

TEST_CASE("exact_counts uses largest remainders") {
  CHECK(exact_counts({0.5, 0.5}, 3) == std::vector<std::size_t>{2, 1});
  CHECK(exact_counts({0.2, 0.3, 0.5}, 10) == std::vector<std::size_t>{2, 3, 5});
  const auto c = exact_counts({1.0 / 3, 1.0 / 3, 1.0 / 3}, 100);
  CHECK(c[0] + c[1] + c[2] == 100);
}

TEST_CASE("infeasible specs are rejected") {
  auto spec = paper_shape_spec();
  spec.components[0].weight += 0.1;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = paper_shape_spec();
  (*spec.components[0].sd)(0) = -1.0;
  CHECK_THROWS_AS(simulate_cohort(spec), ValidationError);
  spec = paper_shape_spec();
  spec.total_n = 3;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("spec JSON round trip and the shipped spec file") {
  const auto spec = paper_shape_spec();
  const auto back = cohort_spec_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
  const auto shipped = nlohmann::json::parse(testing::slurp(CARDIO_SOURCE_DIR "/data/paper_shape_spec.json"));
  CHECK(shipped == to_json(spec));
  CHECK_THROWS_AS(cohort_spec_from_json(nlohmann::json::parse(R"({"total_n": 10})")), ValidationError);
}

}  // TEST_SUITE
