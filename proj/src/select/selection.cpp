#include "cardio/select/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cardio/errors.hpp"
#include "cardio/parallel.hpp"

namespace cardio::select {

std::vector<const PairMeasure*> CorrelationReport::flagged() const {
  std::vector<const PairMeasure*> out;
  for (const auto& p : pairs) {
    if (p.flagged) out.push_back(&p);
  }
  return out;
}

bool is_flagged(double r, double mic, const Thresholds& t) {
  return std::abs(r) >= t.r_abs || mic >= t.mic;
}

CorrelationReport correlation_matrix(const cohort::FeatureTable& table, const Thresholds& thresholds,
                                     const MicOptions& mic_options, unsigned threads) {
  if (!(thresholds.r_abs > 0.0 && thresholds.r_abs <= 1.0)) {
    throw ValidationError("r threshold must lie in (0, 1]");
  }
  if (!(thresholds.mic > 0.0 && thresholds.mic <= 1.0)) {
    throw ValidationError("mic threshold must lie in (0, 1]");
  }
  const auto& catalog = cohort::FeatureCatalog::standard();
  const std::size_t d = catalog.size();
  std::vector<std::vector<double>> cols(d);
  for (std::size_t f = 0; f < d; ++f) {
    const Eigen::VectorXd c = table.column(f);
    cols[f].assign(c.data(), c.data() + c.size());
    const auto [lo, hi] = std::minmax_element(cols[f].begin(), cols[f].end());
    if (*lo == *hi) {
      throw ValidationError("feature '" + catalog[f].name + "' has zero variance; correlation is undefined");
    }
  }

  CorrelationReport report;
  report.features = catalog.names();
  report.thresholds = thresholds;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      PairMeasure p;
      p.a = a;
      p.b = b;
      p.feature_a = catalog[a].name;
      p.feature_b = catalog[b].name;
      report.pairs.push_back(std::move(p));
    }
  }
  parallel_for(report.pairs.size(), threads, [&](std::size_t i) {
    auto& p = report.pairs[i];
    p.pearson = pearson(cols[p.a], cols[p.b]);
    p.mic = mic(cols[p.a], cols[p.b], mic_options);
    p.flagged = is_flagged(p.pearson, p.mic, thresholds);
  });
  return report;
}

SelectionResult select_features(const CorrelationReport& report, const cohort::FeatureCatalog& catalog,
                                DropRule rule) {
  std::vector<bool> kept(catalog.size(), true);
  std::vector<std::pair<std::size_t, std::size_t>> flagged;  // catalog positions
  std::vector<const PairMeasure*> flagged_pairs;
  for (const auto& p : report.pairs) {
    if (!p.flagged) continue;
    flagged.emplace_back(catalog.require_index(p.feature_a), catalog.require_index(p.feature_b));
    flagged_pairs.push_back(&p);
  }
  const auto& t = report.thresholds;

  SelectionResult result;
  while (true) {
    std::size_t worst = flagged.size();
    double worst_severity = -1.0;
    for (std::size_t i = 0; i < flagged.size(); ++i) {
      if (!kept[flagged[i].first] || !kept[flagged[i].second]) continue;
      const auto* p = flagged_pairs[i];
      const double severity = std::max(std::abs(p->pearson) / t.r_abs, p->mic / t.mic);
      if (severity > worst_severity) {
        worst_severity = severity;
        worst = i;
      }
    }
    if (worst == flagged.size()) break;

    auto partners = [&](std::size_t f) {
      std::size_t count = 0;
      for (const auto& [a, b] : flagged) {
        if (kept[a] && kept[b] && (a == f || b == f)) ++count;
      }
      return count;
    };
    const auto [u, v] = flagged[worst];
    const std::size_t early = std::min(u, v);
    const std::size_t late = std::max(u, v);
    const std::size_t pu = partners(early);
    const std::size_t pv = partners(late);
    std::size_t drop;
    if (pu != pv) {
      drop = pu > pv ? early : late;
    } else {
      drop = rule == DropRule::LaterInCatalog ? late : early;
    }
    kept[drop] = false;
    const auto* p = flagged_pairs[worst];
    result.dropped.push_back({catalog[drop].name, p->feature_a, p->feature_b, p->pearson, p->mic});
  }
  for (std::size_t f = 0; f < catalog.size(); ++f) {
    if (kept[f]) result.kept.push_back(catalog[f].name);
  }
  return result;
}

nlohmann::json to_json(const CorrelationReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"feature_a", p.feature_a},
                     {"feature_b", p.feature_b},
                     {"pearson", p.pearson},
                     {"mic", p.mic},
                     {"flagged", p.flagged}});
  }
  return {{"thresholds", {{"r_abs", report.thresholds.r_abs}, {"mic", report.thresholds.mic}}},
          {"features", report.features},
          {"pairs", std::move(pairs)}};
}

nlohmann::json to_json(const SelectionResult& selection) {
  nlohmann::json dropped = nlohmann::json::array();
  for (const auto& d : selection.dropped) {
    dropped.push_back({{"name", d.name},
                       {"cause_pair", {d.cause_a, d.cause_b}},
                       {"r", d.pearson},
                       {"mic", d.mic}});
  }
  return {{"kept", selection.kept}, {"dropped", std::move(dropped)}};
}

SelectionResult selection_from_json(const nlohmann::json& j) {
  try {
    SelectionResult s;
    s.kept = j.at("kept").get<std::vector<std::string>>();
    for (const auto& d : j.at("dropped")) {
      const auto pair = d.at("cause_pair").get<std::vector<std::string>>();
      if (pair.size() != 2) throw ValidationError("selection: cause_pair must have two names");
      s.dropped.push_back({d.at("name").get<std::string>(), pair[0], pair[1], d.at("r").get<double>(),
                           d.at("mic").get<double>()});
    }
    const auto& catalog = cohort::FeatureCatalog::standard();
    std::set<std::string> unique;
    for (const auto& k : s.kept) {
      catalog.require_index(k);
      if (!unique.insert(k).second) throw ValidationError("selection: duplicate kept feature '" + k + "'");
    }
    if (s.kept.empty()) throw ValidationError("selection: no kept features");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("selection: ") + e.what());
  }
}

}  // namespace cardio::select
