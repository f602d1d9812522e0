#include "cardio/cohort/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cardio/errors.hpp"
#include "cardio/rng.hpp"

namespace cardio::cohort {

namespace {

constexpr int kMaxRejections = 10000;

bool in_bounds(std::size_t f, double v) {
  const auto& d = FeatureCatalog::standard()[f];
  if (is_fraction(d.kind)) return v >= 0.0 && v < 1.0;
  return v >= 0.0;
}

// Square root of a component's covariance: x = mean + factor * z.
Eigen::MatrixXd sampling_factor(const ComponentSpec& c) {
  if (c.covariance) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*c.covariance);
    Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
  }
  const Eigen::VectorXd& sd = *c.sd;
  if (!c.correlation) return sd.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*c.correlation);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return sd.asDiagonal() * (eig.eigenvectors() * root.asDiagonal());
}

void check_square(const Eigen::MatrixXd& m, const std::string& what) {
  if (m.rows() != static_cast<Eigen::Index>(kFeatureCount) || m.cols() != static_cast<Eigen::Index>(kFeatureCount)) {
    throw ValidationError(what + " must be 9x9");
  }
  if (!m.allFinite()) throw ValidationError(what + " has non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw ValidationError(what + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    throw ValidationError(what + " is not positive semi-definite");
  }
}

}  // namespace

void CohortSpec::validate() const {
  if (components.empty()) throw ValidationError("cohort spec: no components");
  if (total_n < components.size()) {
    throw ValidationError("cohort spec: total_n (" + std::to_string(total_n) +
                          ") is smaller than the number of components");
  }
  if (total_n < 2) throw ValidationError("cohort spec: total_n must be at least 2");
  double sum = 0.0;
  for (const auto& c : components) {
    const std::string where = "cohort spec: component '" + c.label + "'";
    if (!(c.weight > 0.0)) throw ValidationError(where + ": weight must be positive");
    sum += c.weight;
    if (c.mean.size() != static_cast<Eigen::Index>(kFeatureCount) || !c.mean.allFinite()) {
      throw ValidationError(where + ": mean must have 9 finite entries");
    }
    if (c.covariance && c.sd) throw ValidationError(where + ": give either sd or covariance, not both");
    if (!c.covariance && !c.sd) throw ValidationError(where + ": missing sd or covariance");
    if (c.sd) {
      if (c.sd->size() != static_cast<Eigen::Index>(kFeatureCount) || !c.sd->allFinite()) {
        throw ValidationError(where + ": sd must have 9 finite entries");
      }
      if (c.sd->minCoeff() < 0.0) throw ValidationError(where + ": negative sd");
    }
    if (c.correlation) {
      if (!c.sd) throw ValidationError(where + ": correlation requires sd");
      check_square(*c.correlation, where + ": correlation");
      if ((c.correlation->diagonal().array() - 1.0).abs().maxCoeff() > 1e-9) {
        throw ValidationError(where + ": correlation diagonal must be 1");
      }
    }
    if (c.covariance) check_square(*c.covariance, where + ": covariance");
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (redundant_ef_lvc && f == feature::ef_lvc) continue;
      if (!in_bounds(f, c.mean(static_cast<Eigen::Index>(f)))) {
        throw ValidationError(where + ": mean of '" + FeatureCatalog::standard()[f].name + "' out of range");
      }
    }
    if (redundant_ef_lvc) {
      if (!(c.lvc_ed_mean > c.mean(static_cast<Eigen::Index>(feature::v_lvc_es)))) {
        throw ValidationError(where + ": lvc_ed_mean must exceed the v_lvc_es mean");
      }
      if (c.lvc_ed_sd < 0.0) throw ValidationError(where + ": negative lvc_ed_sd");
    }
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("cohort spec: weights sum to " + format_double(sum) + ", expected 1");
  }
  if (ef_lvc_noise_sd < 0.0) throw ValidationError("cohort spec: negative ef_lvc_noise_sd");
  const auto& r = reference;
  if (r.volume_sd < 0.0 || r.ef_sd < 0.0) throw ValidationError("cohort spec: negative reference noise");
  if (r.outlier_rate < 0.0 || r.outlier_rate > 1.0 || r.missing_rate < 0.0 || r.missing_rate > 1.0) {
    throw ValidationError("cohort spec: reference rates must lie in [0, 1]");
  }
  if (r.outlier_shift_min < 0.0 || r.outlier_shift_max < r.outlier_shift_min) {
    throw ValidationError("cohort spec: reference outlier shift range is invalid");
  }
}

std::vector<std::size_t> exact_counts(const std::vector<double>& weights, std::size_t total) {
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = weights[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    assigned += counts[i];
    remainders.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) {
    counts[remainders[i % remainders.size()].second] += 1;
  }
  while (assigned > total) {
    // Only reachable through rounding when weights sum slightly above 1.
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  return counts;
}

SimulatedCohort simulate_cohort(const CohortSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.total_n;
  const std::size_t k = spec.components.size();

  std::vector<double> weights;
  for (const auto& c : spec.components) weights.push_back(c.weight);

  std::vector<std::size_t> labels(n);
  if (spec.allocation == Allocation::ExactCount) {
    const auto counts = exact_counts(weights, n);
    std::size_t pos = 0;
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t c = 0; c < counts[j]; ++c) labels[pos++] = j;
    }
    for (std::size_t i = n - 1; i > 0; --i) std::swap(labels[i], labels[rng.below(i + 1)]);
  } else {
    std::vector<double> cumulative(k);
    std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform() * cumulative.back();
      std::size_t j = 0;
      while (j + 1 < k && u >= cumulative[j]) ++j;
      labels[i] = j;
    }
  }

  std::vector<Eigen::MatrixXd> factors;
  for (const auto& c : spec.components) factors.push_back(sampling_factor(c));

  const auto d = static_cast<Eigen::Index>(kFeatureCount);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), d);
  std::vector<double> lvc_ed(n);
  std::array<ReferenceColumn, kReferenceCount> reference;
  if (spec.reference.enabled) {
    for (auto& col : reference) col.assign(n, std::nullopt);
  }

  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& comp = spec.components[labels[i]];
    Eigen::VectorXd x;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxRejections && !ok; ++attempt) {
      for (Eigen::Index f = 0; f < d; ++f) z(f) = rng.normal();
      x = comp.mean + factors[labels[i]] * z;
      ok = true;
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (spec.redundant_ef_lvc && f == feature::ef_lvc) continue;
        ok = ok && in_bounds(f, x(static_cast<Eigen::Index>(f)));
      }
    }
    if (!ok) {
      throw ValidationError("cohort spec: component '" + comp.label + "' cannot produce in-range feature values");
    }

    const double es = x(static_cast<Eigen::Index>(feature::v_lvc_es));
    if (spec.redundant_ef_lvc) {
      ok = false;
      for (int attempt = 0; attempt < kMaxRejections && !ok; ++attempt) {
        const double ed = rng.normal(comp.lvc_ed_mean, comp.lvc_ed_sd);
        if (!(ed > es)) continue;
        double ef = 1.0 - es / ed;
        if (spec.ef_lvc_noise_sd > 0.0) ef += rng.normal(0.0, spec.ef_lvc_noise_sd);
        if (ef >= 0.0 && ef < 1.0) {
          x(static_cast<Eigen::Index>(feature::ef_lvc)) = ef;
          lvc_ed[i] = ed;
          ok = true;
        }
      }
      if (!ok) {
        throw ValidationError("cohort spec: component '" + comp.label +
                              "' cannot produce V_LVC,ED above V_LVC,ES");
      }
    } else {
      lvc_ed[i] = derive_lvc_ed_volume(es, x(static_cast<Eigen::Index>(feature::ef_lvc)));
    }
    values.row(static_cast<Eigen::Index>(i)) = x.transpose();

    if (spec.reference.enabled) {
      const auto& r = spec.reference;
      if (rng.uniform() < r.missing_rate) continue;
      auto excursion = [&] {
        if (rng.uniform() < r.outlier_rate) {
          return r.outlier_shift_min + (r.outlier_shift_max - r.outlier_shift_min) * rng.uniform();
        }
        return 0.0;
      };
      double gt_ed = lvc_ed[i] + rng.normal(0.0, r.volume_sd);
      gt_ed += excursion();
      double gt_es = es + rng.normal(0.0, r.volume_sd);
      gt_es += excursion();
      gt_ed = std::max(gt_ed, 0.0);
      gt_es = std::max(gt_es, 0.0);
      double gt_ef = gt_ed > 0.0 ? 1.0 - gt_es / gt_ed : 0.0;
      gt_ef = std::clamp(gt_ef + rng.normal(0.0, r.ef_sd), 0.0, 1.0);
      reference[0][i] = gt_ed;
      reference[1][i] = gt_es;
      reference[2][i] = gt_ef;
    }
  }

  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(1000001 + i);
  return SimulatedCohort{FeatureTable(std::move(ids), std::move(values), std::move(reference)),
                         std::move(labels), std::move(lvc_ed)};
}

CohortSpec paper_shape_spec(std::uint64_t seed) {
  CohortSpec spec;
  spec.total_n = 3822;
  spec.redundant_ef_lvc = true;
  spec.allocation = Allocation::ExactCount;
  spec.seed = seed;
  spec.reference = ReferenceNoise{true, 5.0, 0.02, 0.03, 80.0, 250.0, 0.16};

  // Seven large, mutually distinct components. Counts are chosen so that the
  // two largest groups have 1075 and 889 members.
  struct Large {
    double count;
    std::array<double, kFeatureCount> mean;
    double lvc_ed;
  };
  const std::array<Large, 7> large = {{
      {1075, {90, 26, 0.64, 0.65, 1.05, 0.82, 9.6, 0.25, 0.34}, 74},
      {889, {78, 22, 0.58, 0.69, 1.18, 0.92, 8.6, 0.30, 0.40}, 70},
      {520, {66, 18, 0.52, 0.71, 1.30, 1.06, 7.8, 0.36, 0.48}, 62},
      {430, {100, 31, 0.55, 0.62, 1.12, 0.74, 10.6, 0.22, 0.38}, 82},
      {380, {72, 30, 0.66, 0.61, 0.96, 1.00, 8.9, 0.40, 0.30}, 76},
      {300, {104, 19, 0.50, 0.71, 1.40, 0.88, 8.1, 0.28, 0.52}, 66},
      {213, {84, 34, 0.60, 0.60, 1.24, 0.70, 11.2, 0.33, 0.44}, 86},
  }};
  Eigen::VectorXd sd(kFeatureCount);
  sd << 7.0, 4.0, 0.04, 0.03, 0.08, 0.06, 0.7, 0.04, 0.05;

  Rng shape_rng(0x5eed);
  for (std::size_t j = 0; j < large.size(); ++j) {
    ComponentSpec c;
    c.label = "large_" + std::to_string(j + 1);
    c.weight = large[j].count / static_cast<double>(spec.total_n);
    c.mean = Eigen::Map<const Eigen::VectorXd>(large[j].mean.data(), kFeatureCount);
    c.sd = sd;
    Eigen::MatrixXd a(kFeatureCount, kFeatureCount);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index s = 0; s < a.cols(); ++s) a(r, s) = 0.6 * shape_rng.normal();
    }
    Eigen::MatrixXd cov = a * a.transpose() + Eigen::MatrixXd::Identity(kFeatureCount, kFeatureCount);
    Eigen::VectorXd inv = cov.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd corr = inv.asDiagonal() * cov * inv.asDiagonal();
    corr.diagonal().setOnes();
    c.correlation = corr;
    c.lvc_ed_mean = large[j].lvc_ed;
    c.lvc_ed_sd = 4.0;
    spec.components.push_back(std::move(c));
  }

  ComponentSpec rva;
  rva.label = "rv_dilated";
  rva.weight = 11.0 / static_cast<double>(spec.total_n);
  rva.mean.resize(kFeatureCount);
  rva.mean << 155, 26, 0.52, 0.65, 1.75, 0.85, 9.0, 0.30, 0.40;
  Eigen::VectorXd rva_sd(kFeatureCount);
  rva_sd << 10, 4, 0.08, 0.03, 0.12, 0.06, 0.8, 0.04, 0.05;
  rva.sd = rva_sd;
  rva.lvc_ed_mean = 74;
  rva.lvc_ed_sd = 5;
  spec.components.push_back(std::move(rva));

  ComponentSpec dcm;
  dcm.label = "lv_dilated";
  dcm.weight = 4.0 / static_cast<double>(spec.total_n);
  dcm.mean.resize(kFeatureCount);
  dcm.mean << 95, 150, 0.50, 0.23, 0.55, 0.45, 9.5, 0.45, 0.60;
  Eigen::VectorXd dcm_sd(kFeatureCount);
  dcm_sd << 8, 12, 0.05, 0.03, 0.05, 0.05, 0.8, 0.05, 0.06;
  dcm.sd = dcm_sd;
  dcm.lvc_ed_mean = 195;
  dcm.lvc_ed_sd = 12;
  spec.components.push_back(std::move(dcm));
  return spec;
}

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::VectorXd row = m.row(r).transpose();
    rows.push_back(vector_json(row));
  }
  return rows;
}

Eigen::VectorXd feature_vector(const nlohmann::json& j, const std::string& what) {
  Eigen::VectorXd v(kFeatureCount);
  if (j.is_array()) {
    if (j.size() != kFeatureCount) throw ValidationError(what + ": expected 9 values");
    for (std::size_t f = 0; f < kFeatureCount; ++f) v(static_cast<Eigen::Index>(f)) = j.at(f).get<double>();
  } else if (j.is_object()) {
    const auto& catalog = FeatureCatalog::standard();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (!j.contains(catalog[f].name)) throw ValidationError(what + ": missing '" + catalog[f].name + "'");
      v(static_cast<Eigen::Index>(f)) = j.at(catalog[f].name).get<double>();
    }
    for (const auto& [key, _] : j.items()) catalog.require_index(key);
  } else {
    throw ValidationError(what + ": expected an array or an object keyed by feature name");
  }
  return v;
}

Eigen::MatrixXd feature_matrix(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != kFeatureCount) throw ValidationError(what + ": expected 9 rows");
  Eigen::MatrixXd m(kFeatureCount, kFeatureCount);
  for (std::size_t r = 0; r < kFeatureCount; ++r) {
    m.row(static_cast<Eigen::Index>(r)) = feature_vector(j.at(r), what).transpose();
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const CohortSpec& spec) {
  nlohmann::json j;
  j["total_n"] = spec.total_n;
  j["seed"] = spec.seed;
  j["allocation"] = spec.allocation == Allocation::ExactCount ? "exact" : "multinomial";
  j["redundant_ef_lvc"] = spec.redundant_ef_lvc;
  j["ef_lvc_noise_sd"] = spec.ef_lvc_noise_sd;
  const auto& r = spec.reference;
  j["reference"] = {{"enabled", r.enabled},
                    {"volume_sd", r.volume_sd},
                    {"ef_sd", r.ef_sd},
                    {"outlier_rate", r.outlier_rate},
                    {"outlier_shift_min", r.outlier_shift_min},
                    {"outlier_shift_max", r.outlier_shift_max},
                    {"missing_rate", r.missing_rate}};
  j["features"] = FeatureCatalog::standard().names();
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : spec.components) {
    nlohmann::json cj;
    cj["label"] = c.label;
    cj["weight"] = c.weight;
    cj["mean"] = vector_json(c.mean);
    if (c.sd) cj["sd"] = vector_json(*c.sd);
    if (c.correlation) cj["correlation"] = matrix_json(*c.correlation);
    if (c.covariance) cj["covariance"] = matrix_json(*c.covariance);
    cj["lvc_ed_mean"] = c.lvc_ed_mean;
    cj["lvc_ed_sd"] = c.lvc_ed_sd;
    comps.push_back(std::move(cj));
  }
  j["components"] = std::move(comps);
  return j;
}

CohortSpec cohort_spec_from_json(const nlohmann::json& j) {
  try {
    CohortSpec spec;
    spec.total_n = j.at("total_n").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
    const std::string alloc = j.value("allocation", std::string("multinomial"));
    if (alloc == "exact") {
      spec.allocation = Allocation::ExactCount;
    } else if (alloc == "multinomial") {
      spec.allocation = Allocation::Multinomial;
    } else {
      throw ValidationError("cohort spec: allocation must be 'exact' or 'multinomial'");
    }
    spec.redundant_ef_lvc = j.value("redundant_ef_lvc", true);
    spec.ef_lvc_noise_sd = j.value("ef_lvc_noise_sd", 0.0);
    if (j.contains("reference")) {
      const auto& r = j.at("reference");
      spec.reference.enabled = r.value("enabled", true);
      spec.reference.volume_sd = r.value("volume_sd", 0.0);
      spec.reference.ef_sd = r.value("ef_sd", 0.0);
      spec.reference.outlier_rate = r.value("outlier_rate", 0.0);
      spec.reference.outlier_shift_min = r.value("outlier_shift_min", 0.0);
      spec.reference.outlier_shift_max = r.value("outlier_shift_max", 0.0);
      spec.reference.missing_rate = r.value("missing_rate", 0.0);
    }
    for (const auto& cj : j.at("components")) {
      ComponentSpec c;
      c.label = cj.value("label", std::string("component_") + std::to_string(spec.components.size()));
      const std::string what = "cohort spec: component '" + c.label + "'";
      c.weight = cj.at("weight").get<double>();
      c.mean = feature_vector(cj.at("mean"), what + " mean");
      if (cj.contains("sd")) c.sd = feature_vector(cj.at("sd"), what + " sd");
      if (cj.contains("correlation")) c.correlation = feature_matrix(cj.at("correlation"), what + " correlation");
      if (cj.contains("covariance")) c.covariance = feature_matrix(cj.at("covariance"), what + " covariance");
      c.lvc_ed_mean = cj.value("lvc_ed_mean", 0.0);
      c.lvc_ed_sd = cj.value("lvc_ed_sd", 0.0);
      spec.components.push_back(std::move(c));
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("cohort spec: ") + e.what());
  }
}

}  // namespace cardio::cohort
