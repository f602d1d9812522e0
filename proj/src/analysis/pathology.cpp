#include "cardio/analysis/pathology.hpp"

#include <algorithm>

#include "cardio/errors.hpp"

namespace cardio::analysis {

namespace fi = cohort::feature;

std::string_view to_string(Pathology p) {
  switch (p) {
    case Pathology::RVA: return "RVA";
    case Pathology::DCM: return "DCM";
    case Pathology::HCM_partial: return "HCM_partial";
  }
  return "unknown";
}

void PathologyRules::validate() const {
  if (!(rva_volume > 0.0) || !(dcm_volume > 0.0) || !(hcm_thickness > 0.0)) {
    throw ValidationError("pathology thresholds must be strictly positive");
  }
  for (const double ef : {rva_ef, dcm_ef, hcm_ef}) {
    if (!(ef > 0.0 && ef < 1.0)) throw ValidationError("pathology EF thresholds must lie in (0, 1)");
  }
}

PathologySet match_pathology(std::span<const double> row, const PathologyRules& rules) {
  if (row.size() != cohort::kFeatureCount) throw ValidationError("pathology: record must hold the 9 features");
  const double lvc_ed = cohort::derive_lvc_ed_volume(row[fi::v_lvc_es], row[fi::ef_lvc]);
  PathologySet s;
  s.has[static_cast<std::size_t>(Pathology::RVA)] = row[fi::v_rvc_ed] > rules.rva_volume || row[fi::ef_rvc] < rules.rva_ef;
  s.has[static_cast<std::size_t>(Pathology::DCM)] = lvc_ed > rules.dcm_volume && row[fi::ef_lvc] < rules.dcm_ef;
  s.has[static_cast<std::size_t>(Pathology::HCM_partial)] =
      row[fi::mt_lvm_ed] > rules.hcm_thickness && row[fi::ef_lvc] >= rules.hcm_ef;
  return s;
}

std::vector<PathologyProfile> cluster_pathology_profile(const cohort::FeatureTable& table,
                                                        std::span<const std::size_t> labels,
                                                        const PathologyRules& rules) {
  rules.validate();
  if (labels.size() != table.rows()) throw ValidationError("assignment length does not match table rows");
  const std::size_t n_clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> sizes(n_clusters, 0);
  std::vector<std::array<std::size_t, kPathologyCount>> hits(n_clusters, {0, 0, 0});
  const auto& values = table.values();
  std::array<double, cohort::kFeatureCount> row{};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t f = 0; f < cohort::kFeatureCount; ++f) {
      row[f] = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
    }
    const auto set = match_pathology(row, rules);
    sizes[labels[i]] += 1;
    for (std::size_t p = 0; p < kPathologyCount; ++p) hits[labels[i]][p] += set.has[p] ? 1 : 0;
  }

  std::vector<PathologyProfile> out;
  for (std::size_t c = 0; c < n_clusters; ++c) {
    if (sizes[c] == 0) continue;
    PathologyProfile prof;
    prof.cluster = c;
    prof.size = sizes[c];
    std::size_t best = 0;
    for (std::size_t p = 0; p < kPathologyCount; ++p) {
      prof.proportion[p] = static_cast<double>(hits[c][p]) / static_cast<double>(sizes[c]);
      if (2 * hits[c][p] > sizes[c] && hits[c][p] > best) {
        best = hits[c][p];
        prof.dominant = kPathologies[p];
      }
    }
    out.push_back(prof);
  }
  return out;
}

nlohmann::json to_json(const PathologyProfile& profile) {
  nlohmann::json j;
  j["cluster"] = profile.cluster;
  j["size"] = profile.size;
  nlohmann::json props = nlohmann::json::object();
  for (const auto p : kPathologies) props[std::string(to_string(p))] = profile.proportion[static_cast<std::size_t>(p)];
  j["proportions"] = std::move(props);
  j["dominant"] = profile.dominant ? nlohmann::json(std::string(to_string(*profile.dominant))) : nlohmann::json(nullptr);
  return j;
}

}  // namespace cardio::analysis
