#include "cardio/embed/pca.hpp"

#include <cmath>

#include "cardio/errors.hpp"
#include "cardio/cohort/feature_table.hpp"

namespace cardio::embed {

PcaModel pca_fit(const Eigen::MatrixXd& matrix, std::size_t n_components, const std::vector<std::string>& names) {
  const auto n = static_cast<std::size_t>(matrix.rows());
  const auto d = static_cast<std::size_t>(matrix.cols());
  if (n_components == 0 || n_components > std::min(n, d)) {
    throw ValidationError("pca: n_components = " + std::to_string(n_components) + " must lie in 1.." +
                          std::to_string(std::min(n, d)));
  }
  if (n < 2) throw ValidationError("pca: need at least two rows");
  const Standardized s = standardize(matrix, names);
  const Eigen::MatrixXd cov = (s.z.transpose() * s.z) / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("pca: eigendecomposition failed");

  // Eigen sorts ascending; take from the back.
  const Eigen::VectorXd values = eig.eigenvalues();
  const double total = cov.trace();
  PcaModel model;
  model.scaling = s.params;
  const auto c = static_cast<Eigen::Index>(n_components);
  const auto dd = static_cast<Eigen::Index>(d);
  model.components.resize(dd, c);
  model.explained_ratio.resize(c);
  for (Eigen::Index i = 0; i < c; ++i) {
    Eigen::VectorXd v = eig.eigenvectors().col(dd - 1 - i);
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < dd; ++r) {
      if (std::abs(v(r)) > std::abs(v(arg))) arg = r;
    }
    if (v(arg) < 0.0) v = -v;
    model.components.col(i) = v;
    model.explained_ratio(i) = std::max(0.0, values(dd - 1 - i)) / total;
  }
  return model;
}

Embedding pca_project(const PcaModel& model, const Eigen::MatrixXd& rows, std::vector<RowRole> roles) {
  if (roles.empty()) roles.assign(static_cast<std::size_t>(rows.rows()), RowRole::Case);
  if (roles.size() != static_cast<std::size_t>(rows.rows())) throw ValidationError("pca: role count does not match rows");
  Embedding e;
  e.coords = model.scaling.apply(rows) * model.components;
  e.roles = std::move(roles);
  e.method = Method::Pca;
  return e;
}

void write_embedding_csv(std::ostream& out, const Embedding& embedding, const std::vector<std::string>& ids,
                         const std::vector<std::size_t>& clusters) {
  const auto n = static_cast<std::size_t>(embedding.coords.rows());
  if (ids.size() != n || embedding.roles.size() != n) throw ValidationError("embedding: id count does not match rows");
  if (!clusters.empty() && clusters.size() != n) throw ValidationError("embedding: cluster count does not match rows");
  if (embedding.coords.cols() < 2) throw ValidationError("embedding: need two dimensions");
  out << "id,role,dim1,dim2" << (clusters.empty() ? "" : ",cluster") << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << ids[i] << ',' << (embedding.roles[i] == RowRole::Case ? "case" : "center") << ','
        << cohort::format_double(embedding.coords(r, 0)) << ',' << cohort::format_double(embedding.coords(r, 1));
    if (!clusters.empty()) out << ',' << clusters[i];
    out << '\n';
  }
}

}  // namespace cardio::embed
