#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cardio/cohort/catalog.hpp"
#include "cardio/cohort/feature_table.hpp"
#include "cardio/rng.hpp"

namespace testing {

inline Eigen::MatrixXd random_normal(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  cardio::Rng rng(seed);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
  cardio::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(mean, sd);
  return v;
}

// A plausible unremarkable case, catalog order.
inline std::vector<double> normal_row() { return {80.0, 28.0, 0.55, 0.60, 1.1, 0.8, 9.0, 0.3, 0.4}; }

inline cardio::cohort::FeatureTable table_from(const Eigen::MatrixXd& values) {
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < values.rows(); ++i) ids.push_back("case" + std::to_string(i));
  return cardio::cohort::FeatureTable(ids, values);
}

// Rows of normal_row() with feature-wise noise, always in range.
inline Eigen::MatrixXd plausible_rows(Eigen::Index n, std::uint64_t seed) {
  const auto base = normal_row();
  const std::vector<double> sd{8.0, 4.0, 0.04, 0.04, 0.1, 0.06, 0.8, 0.03, 0.04};
  cardio::Rng rng(seed);
  Eigen::MatrixXd m(n, 9);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < 9; ++j) m(i, j) = base[j] + sd[j] * rng.normal();
  return m;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cardio_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace testing
