#include "cardio/analysis/model_choice.hpp"

#include <cmath>

#include "cardio/analysis/summary.hpp"
#include "cardio/errors.hpp"

namespace cardio::analysis {

ModelChoice choose_model(const gmm::BicSweep& sweep, const Eigen::MatrixXd& data, double small_fraction,
                         double bic_band) {
  if (!(bic_band >= 0.0) || !std::isfinite(bic_band)) throw ValidationError("bic-band must be non-negative");
  if (!sweep.selected) throw NumericalError("no model in the BIC sweep could be fitted");
  const auto n = static_cast<std::size_t>(data.rows());
  ModelChoice choice;
  choice.small_threshold = small_threshold(n, small_fraction);
  const auto& best = sweep.entries[*sweep.selected];
  choice.type = best.type;

  std::optional<std::size_t> pick;
  std::size_t pick_small = 0;
  for (std::size_t i = 0; i < sweep.entries.size(); ++i) {
    const auto& e = sweep.entries[i];
    if (!e.ok || e.type != best.type || e.bic > best.bic + bic_band) continue;
    const auto labels = gmm::assign(*e.model, data).hard_labels;
    std::vector<std::size_t> sizes(e.k, 0);
    for (const auto l : labels) ++sizes[l];
    std::size_t small = 0;
    for (const auto s : sizes) small += (s > 0 && s <= choice.small_threshold) ? 1 : 0;
    choice.candidates.push_back({i, e.k, e.bic, small});
    if (!pick || small > pick_small || (small == pick_small && e.k < sweep.entries[*pick].k)) {
      pick = i;
      pick_small = small;
    }
  }
  choice.entry = *pick;
  choice.k = sweep.entries[*pick].k;
  return choice;
}

nlohmann::json to_json(const ModelChoice& choice) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : choice.candidates) {
    cands.push_back({{"k", c.k}, {"bic", c.bic}, {"small_clusters", c.small_clusters}});
  }
  return {{"covariance_type", std::string(gmm::to_string(choice.type))},
          {"k", choice.k},
          {"small_threshold", choice.small_threshold},
          {"candidates", std::move(cands)}};
}

}  // namespace cardio::analysis
