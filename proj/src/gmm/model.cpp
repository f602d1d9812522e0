#include "cardio/gmm/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "cardio/errors.hpp"

namespace cardio::gmm {

std::string_view to_string(CovarianceType type) {
  switch (type) {
    case CovarianceType::Tied: return "tied";
    case CovarianceType::Diag: return "diag";
    case CovarianceType::Full: return "full";
  }
  return "unknown";
}

CovarianceType parse_covariance_type(std::string_view name) {
  if (name == "tied") return CovarianceType::Tied;
  if (name == "diag") return CovarianceType::Diag;
  if (name == "full") return CovarianceType::Full;
  throw ValidationError("unknown covariance type '" + std::string(name) + "' (expected tied, diag or full)");
}

CovarianceType GmmModel::type() const {
  if (std::holds_alternative<TiedCovariance>(covariance)) return CovarianceType::Tied;
  if (std::holds_alternative<DiagCovariance>(covariance)) return CovarianceType::Diag;
  return CovarianceType::Full;
}

Eigen::MatrixXd GmmModel::component_covariance(std::size_t j) const {
  const auto jj = static_cast<Eigen::Index>(j);
  if (const auto* t = std::get_if<TiedCovariance>(&covariance)) return t->matrix;
  if (const auto* dg = std::get_if<DiagCovariance>(&covariance)) {
    return dg->variances.row(jj).transpose().asDiagonal();
  }
  return std::get<FullCovariance>(covariance).matrices[j];
}

void GmmModel::validate() const {
  const auto kk = means.rows();
  const auto dd = means.cols();
  if (kk < 1 || dd < 1) throw ValidationError("gmm model: empty means");
  if (weights.size() != kk) throw ValidationError("gmm model: weight count does not match component count");
  if (!weights.allFinite() || weights.minCoeff() <= 0.0) throw ValidationError("gmm model: weights must be positive");
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw ValidationError("gmm model: weights must sum to 1");
  if (!means.allFinite()) throw ValidationError("gmm model: non-finite means");
  if (const auto* t = std::get_if<TiedCovariance>(&covariance)) {
    if (t->matrix.rows() != dd || t->matrix.cols() != dd) throw ValidationError("gmm model: tied covariance shape");
  } else if (const auto* dg = std::get_if<DiagCovariance>(&covariance)) {
    if (dg->variances.rows() != kk || dg->variances.cols() != dd) {
      throw ValidationError("gmm model: diag covariance shape");
    }
  } else {
    const auto& f = std::get<FullCovariance>(covariance);
    if (static_cast<Eigen::Index>(f.matrices.size()) != kk) throw ValidationError("gmm model: full covariance count");
    for (const auto& m : f.matrices) {
      if (m.rows() != dd || m.cols() != dd) throw ValidationError("gmm model: full covariance shape");
    }
  }
}

ComponentDensities::ComponentDensities(const GmmModel& model) : model_(model) {
  const std::size_t k = model.k();
  if (const auto* dg = std::get_if<DiagCovariance>(&model.covariance)) {
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::VectorXd var = dg->variances.row(static_cast<Eigen::Index>(j)).transpose();
      if (!(var.minCoeff() > 0.0) || !var.allFinite()) {
        throw NumericalError("covariance of component " + std::to_string(j) + " is not positive definite");
      }
      whiten_.push_back(var.cwiseSqrt().cwiseInverse().asDiagonal());
      log_det_.push_back(var.array().log().sum());
    }
    return;
  }
  const bool tied = std::holds_alternative<TiedCovariance>(model.covariance);
  for (std::size_t j = 0; j < k; ++j) {
    if (tied && j > 0) {
      whiten_.push_back(whiten_.front());
      log_det_.push_back(log_det_.front());
      continue;
    }
    const Eigen::MatrixXd cov = model.component_covariance(j);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success || !cov.allFinite()) {
      throw NumericalError(tied ? std::string("tied covariance is not positive definite")
                                : "covariance of component " + std::to_string(j) + " is not positive definite");
    }
    Eigen::MatrixXd l = llt.matrixL();
    // Transposed inverse factor, so that (x - mu) * whiten has identity covariance.
    Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(l.rows(), l.cols());
    l.triangularView<Eigen::Lower>().solveInPlace(inv);
    whiten_.push_back(inv.transpose());
    log_det_.push_back(2.0 * l.diagonal().array().log().sum());
  }
}

Eigen::MatrixXd ComponentDensities::weighted_log_density(const Eigen::MatrixXd& data) const {
  const auto n = data.rows();
  const auto d = data.cols();
  const std::size_t k = model_.k();
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(k));
  Eigen::MatrixXd centered(n, d);
  Eigen::ArrayXd maha(n), z(n);
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const Eigen::MatrixXd& w = whiten_[j];  // upper triangular
    const double constant =
        std::log(model_.weights(jj)) - 0.5 * (static_cast<double>(d) * log_2pi + log_det_[j]);
    centered = data.rowwise() - model_.means.row(jj);
    // Column-at-a-time so every operation runs over contiguous n-vectors.
    maha.setZero();
    for (Eigen::Index c = 0; c < d; ++c) {
      z = w(0, c) * centered.col(0).array();
      for (Eigen::Index r = 1; r <= c; ++r) z += w(r, c) * centered.col(r).array();
      maha += z.square();
    }
    out.col(jj) = (constant - 0.5 * maha).matrix();
  }
  return out;
}

Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& m) {
  return posterior(m).log_norm;
}

Posterior posterior(const Eigen::MatrixXd& m) {
  Posterior p;
  const Eigen::VectorXd mx = m.rowwise().maxCoeff();
  p.responsibilities = (m.colwise() - mx).array().exp().matrix();
  const Eigen::ArrayXd sum = p.responsibilities.rowwise().sum().array();
  p.responsibilities.array().colwise() /= sum;
  p.log_norm = mx.array() + sum.log();
  // Rows without any finite density: keep the maximum, no responsibilities.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!std::isfinite(mx(i))) {
      p.log_norm(i) = mx(i);
      p.responsibilities.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return p;
}

namespace {
void check_dimension(const GmmModel& model, const Eigen::MatrixXd& data) {
  if (static_cast<std::size_t>(data.cols()) != model.d()) {
    throw ValidationError("data has " + std::to_string(data.cols()) + " columns but the model expects " +
                          std::to_string(model.d()));
  }
}
}  // namespace

double log_likelihood(const GmmModel& model, const Eigen::MatrixXd& data) {
  check_dimension(model, data);
  const ComponentDensities dens(model);
  return log_sum_exp_rows(dens.weighted_log_density(data)).sum();
}

std::size_t param_count(std::size_t k, std::size_t d, CovarianceType type) {
  const std::size_t base = (k - 1) + k * d;
  switch (type) {
    case CovarianceType::Full: return base + k * d * (d + 1) / 2;
    case CovarianceType::Tied: return base + d * (d + 1) / 2;
    case CovarianceType::Diag: return base + k * d;
  }
  return base;
}

double bic_from(double log_likelihood, std::size_t params, std::size_t n) {
  return static_cast<double>(params) * std::log(static_cast<double>(n)) - 2.0 * log_likelihood;
}

double bic(const GmmModel& model, std::size_t n) {
  return bic_from(model.fit.log_likelihood, param_count(model.k(), model.d(), model.type()), n);
}

std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& responsibilities) {
  std::vector<std::size_t> labels(static_cast<std::size_t>(responsibilities.rows()));
  for (Eigen::Index i = 0; i < responsibilities.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < responsibilities.cols(); ++j) {
      if (responsibilities(i, j) > responsibilities(i, best)) best = j;
    }
    labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return labels;
}

Assignment assign(const GmmModel& model, const Eigen::MatrixXd& data) {
  check_dimension(model, data);
  const ComponentDensities dens(model);
  Assignment a;
  a.responsibilities = posterior(dens.weighted_log_density(data)).responsibilities;
  a.hard_labels = argmax_rows(a.responsibilities);
  return a;
}

GmmModel permute_components(const GmmModel& model, const std::vector<std::size_t>& order) {
  if (order.size() != model.k()) throw ValidationError("permutation length does not match component count");
  GmmModel out = model;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(order[i]);
    const auto dst = static_cast<Eigen::Index>(i);
    out.weights(dst) = model.weights(src);
    out.means.row(dst) = model.means.row(src);
    if (auto* dg = std::get_if<DiagCovariance>(&out.covariance)) {
      dg->variances.row(dst) = std::get<DiagCovariance>(model.covariance).variances.row(src);
    } else if (auto* f = std::get_if<FullCovariance>(&out.covariance)) {
      f->matrices[i] = std::get<FullCovariance>(model.covariance).matrices[order[i]];
    }
  }
  return out;
}

GmmModel to_full(const GmmModel& model) {
  GmmModel out = model;
  FullCovariance full;
  for (std::size_t j = 0; j < model.k(); ++j) full.matrices.push_back(model.component_covariance(j));
  out.covariance = std::move(full);
  return out;
}

}  // namespace cardio::gmm
