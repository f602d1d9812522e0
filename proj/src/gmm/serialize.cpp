#include "cardio/gmm/serialize.hpp"

#include "cardio/errors.hpp"

namespace cardio::gmm {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& field) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw ValidationError("model: field '" + field + "' must have " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError("model: field '" + field + "' row " + std::to_string(i) + " must have " +
                            std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ValidationError("model: field '" + field + "' has a non-numeric entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw ValidationError(std::string("model: missing field '") + name + "'");
  return j.at(name);
}

}  // namespace

json to_json(const GmmModel& model, const std::vector<std::string>& features) {
  json j;
  j["covariance_type"] = std::string(to_string(model.type()));
  j["k"] = model.k();
  j["d"] = model.d();
  j["features"] = features;
  j["weights"] = std::vector<double>(model.weights.data(), model.weights.data() + model.weights.size());
  j["means"] = matrix_json(model.means);
  if (const auto* t = std::get_if<TiedCovariance>(&model.covariance)) {
    j["covariance"] = matrix_json(t->matrix);
  } else if (const auto* dg = std::get_if<DiagCovariance>(&model.covariance)) {
    j["covariance"] = matrix_json(dg->variances);
  } else {
    json arr = json::array();
    for (const auto& m : std::get<FullCovariance>(model.covariance).matrices) arr.push_back(matrix_json(m));
    j["covariance"] = std::move(arr);
  }
  j["fit"] = {{"log_likelihood", model.fit.log_likelihood},
              {"iterations", model.fit.iterations},
              {"converged", model.fit.converged},
              {"seed", model.fit.seed},
              {"restart", model.fit.restart}};
  return j;
}

LoadedModel model_from_json(const json& j) {
  LoadedModel out;
  GmmModel& m = out.model;
  try {
    const auto type = parse_covariance_type(field(j, "covariance_type").get<std::string>());
    const auto k = field(j, "k").get<std::size_t>();
    const auto d = field(j, "d").get<std::size_t>();
    if (k < 1 || d < 1) throw ValidationError("model: k and d must be positive");
    const auto kk = static_cast<Eigen::Index>(k);
    const auto dd = static_cast<Eigen::Index>(d);
    out.features = field(j, "features").get<std::vector<std::string>>();
    if (out.features.size() != d) throw ValidationError("model: 'features' must list d names");
    const auto w = field(j, "weights").get<std::vector<double>>();
    if (w.size() != k) throw ValidationError("model: 'weights' must have k entries");
    m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), kk);
    m.means = matrix_from(field(j, "means"), kk, dd, "means");
    const auto& cov = field(j, "covariance");
    switch (type) {
      case CovarianceType::Tied: m.covariance = TiedCovariance{matrix_from(cov, dd, dd, "covariance")}; break;
      case CovarianceType::Diag: m.covariance = DiagCovariance{matrix_from(cov, kk, dd, "covariance")}; break;
      case CovarianceType::Full: {
        if (!cov.is_array() || cov.size() != k) throw ValidationError("model: 'covariance' must hold k matrices");
        FullCovariance f;
        for (std::size_t i = 0; i < k; ++i) f.matrices.push_back(matrix_from(cov[i], dd, dd, "covariance"));
        m.covariance = std::move(f);
        break;
      }
    }
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      m.fit.log_likelihood = f.value("log_likelihood", 0.0);
      m.fit.iterations = f.value("iterations", 0);
      m.fit.converged = f.value("converged", false);
      m.fit.seed = f.value("seed", std::uint64_t{0});
      m.fit.restart = f.value("restart", 0);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model: malformed JSON field (") + e.what() + ")");
  }
  m.validate();
  return out;
}

}  // namespace cardio::gmm
