#include "cardio/gmm/sweep.hpp"

#include <algorithm>

#include "cardio/cohort/feature_table.hpp"
#include "cardio/errors.hpp"
#include "cardio/parallel.hpp"
#include "cardio/rng.hpp"

namespace cardio::gmm {

void SweepOptions::validate(std::size_t n) const {
  if (k_min < 1 || k_max < k_min) {
    throw ValidationError("k-range must satisfy 1 <= min <= max, got " + std::to_string(k_min) + ".." +
                          std::to_string(k_max));
  }
  if (k_max >= n) {
    throw ValidationError("k-range maximum " + std::to_string(k_max) + " must be below the sample count " +
                          std::to_string(n));
  }
  if (types.empty()) throw ValidationError("at least one covariance type is required");
  em.validate();
}

std::optional<std::size_t> BicSweep::best_for(CovarianceType type) const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!e.ok || e.type != type) continue;
    if (!best || e.bic < entries[*best].bic) best = i;
  }
  return best;
}

std::optional<std::size_t> BicSweep::find(CovarianceType type, std::size_t k) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].type == type && entries[i].k == k) return i;
  }
  return std::nullopt;
}

std::uint64_t cell_seed(std::uint64_t base, CovarianceType type, std::size_t k) {
  return derive_seed(derive_seed(base, to_string(type)), static_cast<std::uint64_t>(k));
}

BicSweep sweep(const Eigen::MatrixXd& data, const SweepOptions& options, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.rows());
  options.validate(n);

  BicSweep result;
  result.n = n;
  for (const auto type : options.types) {
    for (std::size_t k = options.k_min; k <= options.k_max; ++k) {
      SweepEntry e;
      e.type = type;
      e.k = k;
      e.params = param_count(k, static_cast<std::size_t>(data.cols()), type);
      result.entries.push_back(std::move(e));
    }
  }

  // Large k first so the slowest cells start early.
  std::vector<std::size_t> order(result.entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.entries[a].k > result.entries[b].k;
  });

  parallel_for(order.size(), options.threads, [&](std::size_t slot) {
    auto& e = result.entries[order[slot]];
    try {
      GmmModel m = fit_em(data, e.k, e.type, cell_seed(seed, e.type, e.k), options.em);
      e.log_likelihood = m.fit.log_likelihood;
      e.bic = bic_from(e.log_likelihood, e.params, n);
      e.ok = true;
      e.model = std::move(m);
    } catch (const std::exception& ex) {
      e.ok = false;
      e.error = ex.what();
    }
  });

  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    const auto& e = result.entries[i];
    if (e.ok && (!result.selected || e.bic < result.entries[*result.selected].bic)) result.selected = i;
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const BicSweep& sweep) {
  out << "cov_type,k,loglik,params,bic\n";
  for (const auto& e : sweep.entries) {
    out << to_string(e.type) << ',' << e.k << ',';
    if (e.ok) {
      out << cohort::format_double(e.log_likelihood) << ',' << e.params << ',' << cohort::format_double(e.bic) << '\n';
    } else {
      out << "NA," << e.params << ",NA\n";
    }
  }
}

}  // namespace cardio::gmm
