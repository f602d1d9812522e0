#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cardio::gmm {

enum class CovarianceType { Tied, Diag, Full };

std::string_view to_string(CovarianceType type);
/// Accepts "tied", "diag", "full"; throws ValidationError otherwise.
CovarianceType parse_covariance_type(std::string_view name);

/// One d x d matrix shared by all components.
struct TiedCovariance {
  Eigen::MatrixXd matrix;
};
/// Per-component variances, k x d.
struct DiagCovariance {
  Eigen::MatrixXd variances;
};
/// Per-component d x d matrices.
struct FullCovariance {
  std::vector<Eigen::MatrixXd> matrices;
};
using Covariance = std::variant<TiedCovariance, DiagCovariance, FullCovariance>;

struct FitMetadata {
  double log_likelihood = 0.0;  // total over the fitted samples
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  int restart = 0;
  // Mean per-sample log-likelihood after each E-step of the returned restart.
  std::vector<double> trace;
  // Worst per-iteration drop of the mean log-likelihood and worst
  // responsibility row-sum error seen over all restarts.
  double max_decrease = 0.0;
  double max_row_sum_error = 0.0;
  // A restart is thin when some component's effective size fell below 2d at
  // any iteration. There the diagonal regularization dominates a direction
  // of that covariance and the M-step no longer maximizes the likelihood.
  int thin_restarts = 0;
  // Worst drop over the restarts that never went thin.
  double max_decrease_supported = 0.0;
};

struct GmmModel {
  Eigen::VectorXd weights;  // k
  Eigen::MatrixXd means;    // k x d
  Covariance covariance;
  FitMetadata fit;

  std::size_t k() const { return static_cast<std::size_t>(means.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(means.cols()); }
  CovarianceType type() const;
  /// Dense covariance of component j regardless of structure.
  Eigen::MatrixXd component_covariance(std::size_t j) const;
  /// Throws ValidationError on shape mismatches, non-positive weights or
  /// weights not summing to 1.
  void validate() const;
};

/// Per-component Cholesky factors and log-determinants, reusable across
/// density evaluations. Throws NumericalError naming the component whose
/// covariance is not positive definite.
class ComponentDensities {
 public:
  explicit ComponentDensities(const GmmModel& model);
  /// n x k matrix of log w_j + log N(x_i; mu_j, Sigma_j).
  Eigen::MatrixXd weighted_log_density(const Eigen::MatrixXd& data) const;

 private:
  const GmmModel& model_;
  std::vector<Eigen::MatrixXd> whiten_;  // L^-T for covariance L L^T
  std::vector<double> log_det_;
};

/// Row-wise log-sum-exp of an n x k matrix.
Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& m);

struct Posterior {
  Eigen::VectorXd log_norm;          // row-wise log-sum-exp
  Eigen::MatrixXd responsibilities;  // rows normalized to 1
};
/// Normalizes an n x k matrix of weighted log densities, exponentiating each
/// entry once.
Posterior posterior(const Eigen::MatrixXd& weighted_log_density);

/// Sum over samples of log sum_j w_j N(x_i; mu_j, Sigma_j).
/// Throws ValidationError on dimension mismatch.
double log_likelihood(const GmmModel& model, const Eigen::MatrixXd& data);

/// Free parameters: (k-1) weights + k*d means + covariance terms.
std::size_t param_count(std::size_t k, std::size_t d, CovarianceType type);

/// p ln(n) - 2 ln L using the stored fit log-likelihood.
double bic(const GmmModel& model, std::size_t n);
double bic_from(double log_likelihood, std::size_t params, std::size_t n);

struct Assignment {
  Eigen::MatrixXd responsibilities;     // n x k, rows sum to 1
  std::vector<std::size_t> hard_labels; // row argmax, ties to the lowest index
};

/// Posterior responsibilities and hard labels. Throws ValidationError on
/// dimension mismatch.
Assignment assign(const GmmModel& model, const Eigen::MatrixXd& data);

/// Hard labels from responsibilities: argmax per row, lowest index on ties.
std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& responsibilities);

/// Reorders components: new component i is old component order[i].
GmmModel permute_components(const GmmModel& model, const std::vector<std::size_t>& order);

/// Same model expressed with per-component full covariance matrices.
GmmModel to_full(const GmmModel& model);

}  // namespace cardio::gmm
