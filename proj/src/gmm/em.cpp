#include "cardio/gmm/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "cardio/errors.hpp"
#include "cardio/rng.hpp"

namespace cardio::gmm {

void EmOptions::validate() const {
  if (!(tol >= 0.0) || !std::isfinite(tol)) throw ValidationError("tol must be a finite non-negative number");
  if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
  if (!(reg >= 0.0) || !std::isfinite(reg)) throw ValidationError("reg must be a finite non-negative number");
  if (restarts < 1) throw ValidationError("restarts must be at least 1");
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_data(const Eigen::MatrixXd& data, std::size_t k) {
  if (data.rows() == 0 || data.cols() == 0) throw ValidationError("em: empty data");
  if (!data.allFinite()) throw ValidationError("em: data contains non-finite values");
  if (k < 1) throw ValidationError("em: k must be at least 1");
  if (k >= static_cast<std::size_t>(data.rows())) {
    throw ValidationError("em: k = " + std::to_string(k) + " must be smaller than n = " + std::to_string(data.rows()));
  }
}

// Weighted MLE of the parameters for the given responsibilities.
GmmModel m_step(const Eigen::MatrixXd& data, const Eigen::MatrixXd& resp, CovarianceType type, double reg) {
  const auto n = data.rows();
  const auto d = data.cols();
  const auto k = resp.cols();
  // Small floor keeps empty components finite.
  const Eigen::VectorXd nk = resp.colwise().sum().transpose().array() + 10.0 * kEps;

  GmmModel model;
  model.weights = nk / nk.sum();
  model.means = (resp.transpose() * data).array().colwise() / nk.array();
  Eigen::MatrixXd centered(n, d);

  switch (type) {
    case CovarianceType::Full: {
      FullCovariance full;
      for (Eigen::Index j = 0; j < k; ++j) {
        centered = data.rowwise() - model.means.row(j);
        Eigen::MatrixXd cov = centered.transpose() * resp.col(j).asDiagonal() * centered;
        cov /= nk(j);
        cov.diagonal().array() += reg;
        full.matrices.push_back(std::move(cov));
      }
      model.covariance = std::move(full);
      break;
    }
    case CovarianceType::Tied: {
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
      for (Eigen::Index j = 0; j < k; ++j) {
        centered = data.rowwise() - model.means.row(j);
        cov.noalias() += centered.transpose() * resp.col(j).asDiagonal() * centered;
      }
      cov /= nk.sum();
      cov.diagonal().array() += reg;
      model.covariance = TiedCovariance{std::move(cov)};
      break;
    }
    case CovarianceType::Diag: {
      Eigen::MatrixXd var(k, d);
      for (Eigen::Index j = 0; j < k; ++j) {
        centered = data.rowwise() - model.means.row(j);
        var.row(j) = (resp.col(j).transpose() * centered.array().square().matrix()) / nk(j);
      }
      var.array() += reg;
      model.covariance = DiagCovariance{std::move(var)};
      break;
    }
  }
  return model;
}

struct RunResult {
  GmmModel model;
  double max_decrease = 0.0;
  double max_row_sum_error = 0.0;
  bool thin = false;
};

// EM from initial parameters. The stored log-likelihood always belongs to the
// returned parameters: the loop ends on an E-step.
RunResult run_em(const Eigen::MatrixXd& data, GmmModel params, CovarianceType type, const EmOptions& opt) {
  const double n = static_cast<double>(data.rows());
  RunResult out;
  std::vector<double> trace;
  double total = 0.0;
  bool converged = false;
  int iterations = 0;
  const double support = 2.0 * static_cast<double>(data.cols());
  out.thin = params.weights.minCoeff() * n < support;
  for (int it = 0;; ++it) {
    const ComponentDensities dens(params);
    const Posterior post = posterior(dens.weighted_log_density(data));
    total = post.log_norm.sum();
    if (!std::isfinite(total)) throw NumericalError("em: log-likelihood became non-finite");
    const double mean = total / n;
    if (!trace.empty()) {
      out.max_decrease = std::max(out.max_decrease, trace.back() - mean);
      if (mean - trace.back() < opt.tol) {
        trace.push_back(mean);
        converged = true;
        break;
      }
    }
    trace.push_back(mean);
    if (it == opt.max_iter) break;
    const Eigen::MatrixXd& resp = post.responsibilities;
    const double row_err = (resp.rowwise().sum().array() - 1.0).abs().maxCoeff();
    out.max_row_sum_error = std::max(out.max_row_sum_error, row_err);
    out.thin = out.thin || resp.colwise().sum().minCoeff() < support;
    params = m_step(data, resp, type, opt.reg);
    ++iterations;
  }
  params.fit.log_likelihood = total;
  params.fit.iterations = iterations;
  params.fit.converged = converged;
  params.fit.trace = std::move(trace);
  out.model = std::move(params);
  return out;
}

double squared_distance(const Eigen::MatrixXd& data, Eigen::Index i, Eigen::Index j) {
  return (data.row(i) - data.row(j)).squaredNorm();
}

// Index of the first entry whose cumulative weight exceeds target.
std::size_t sample_index(const Eigen::VectorXd& weights, double total, Rng& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  const auto n = weights.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += weights(i);
    if (acc > target) return static_cast<std::size_t>(i);
  }
  // Rounding can leave target just above the final sum.
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (weights(i) > 0.0) return static_cast<std::size_t>(i);
  }
  return 0;
}

}  // namespace

std::vector<std::size_t> kmeans_plusplus(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed) {
  check_data(data, k > 0 ? k : 1);
  const auto n = data.rows();
  Rng rng(seed);
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));

  std::vector<std::size_t> centers;
  centers.push_back(rng.below(static_cast<std::size_t>(n)));
  Eigen::VectorXd closest(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    closest(i) = squared_distance(data, i, static_cast<Eigen::Index>(centers[0]));
  }
  double potential = closest.sum();

  Eigen::VectorXd candidate_closest(n);
  Eigen::VectorXd best_closest(n);
  while (centers.size() < k) {
    std::size_t best = 0;
    double best_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      // Degenerate case: all remaining points coincide with a center.
      const std::size_t cand = potential > 0.0 ? sample_index(closest, potential, rng)
                                               : rng.below(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        candidate_closest(i) = std::min(closest(i), squared_distance(data, i, static_cast<Eigen::Index>(cand)));
      }
      const double pot = candidate_closest.sum();
      if (pot < best_potential) {
        best_potential = pot;
        best = cand;
        best_closest = candidate_closest;
      }
    }
    centers.push_back(best);
    closest = best_closest;
    potential = best_potential;
  }
  return centers;
}

GmmModel fit_em(const Eigen::MatrixXd& data, std::size_t k, CovarianceType type, std::uint64_t seed,
                const EmOptions& options) {
  options.validate();
  check_data(data, k);
  const auto n = data.rows();
  const auto kk = static_cast<Eigen::Index>(k);

  std::optional<GmmModel> best;
  double max_decrease = 0.0;
  double max_decrease_supported = 0.0;
  double max_row_err = 0.0;
  int thin = 0;
  for (int r = 0; r < options.restarts; ++r) {
    const std::uint64_t restart_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    const auto centers = kmeans_plusplus(data, k, restart_seed);

    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, kk);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index nearest = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < kk; ++j) {
        const double dist = squared_distance(data, i, static_cast<Eigen::Index>(centers[static_cast<std::size_t>(j)]));
        if (dist < best_d) {
          best_d = dist;
          nearest = j;
        }
      }
      resp(i, nearest) = 1.0;
    }
    RunResult run = run_em(data, m_step(data, resp, type, options.reg), type, options);
    max_decrease = std::max(max_decrease, run.max_decrease);
    if (run.thin) ++thin;
    else max_decrease_supported = std::max(max_decrease_supported, run.max_decrease);
    max_row_err = std::max(max_row_err, run.max_row_sum_error);
    run.model.fit.seed = restart_seed;
    run.model.fit.restart = r;
    if (!best || run.model.fit.log_likelihood > best->fit.log_likelihood) best = std::move(run.model);
  }
  best->fit.max_decrease = max_decrease;
  best->fit.max_row_sum_error = max_row_err;
  best->fit.thin_restarts = thin;
  best->fit.max_decrease_supported = max_decrease_supported;
  return *std::move(best);
}

GmmModel fit_em_from(const Eigen::MatrixXd& data, const GmmModel& init, const EmOptions& options) {
  options.validate();
  init.validate();
  check_data(data, init.k());
  if (static_cast<std::size_t>(data.cols()) != init.d()) {
    throw ValidationError("em: initial model dimension does not match data");
  }
  RunResult run = run_em(data, init, init.type(), options);
  run.model.fit.seed = init.fit.seed;
  run.model.fit.restart = 0;
  run.model.fit.max_decrease = run.max_decrease;
  run.model.fit.max_row_sum_error = run.max_row_sum_error;
  run.model.fit.thin_restarts = run.thin ? 1 : 0;
  run.model.fit.max_decrease_supported = run.thin ? 0.0 : run.max_decrease;
  return std::move(run.model);
}

}  // namespace cardio::gmm
