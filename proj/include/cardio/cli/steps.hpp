#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "cardio/gmm/model.hpp"
#include "cardio/select/selection.hpp"

namespace cardio::cli {

/// Everything a subcommand may need. Every step reads its inputs from
/// `input` and from artifacts earlier steps left in `out`.
struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path out = ".";
  std::filesystem::path spec;  // simulate / pipeline; empty = built-in paper shape
  std::filesystem::path write_spec;  // simulate: also save the spec used
  std::uint64_t seed = 2019;
  bool seed_given = false;

  double r_threshold = 0.8;
  double mic_threshold = 0.5;
  select::DropRule drop_rule = select::DropRule::LaterInCatalog;

  std::size_t k_min = 1;
  std::size_t k_max = 15;
  std::vector<gmm::CovarianceType> cov_types{gmm::CovarianceType::Tied, gmm::CovarianceType::Diag,
                                             gmm::CovarianceType::Full};
  int restarts = 10;
  double tol = 1e-6;
  int max_iter = 500;
  double reg = 1e-6;
  double bic_band = 10.0;

  double small_fraction = 0.02;
  double alpha = 0.05;

  double perplexity = 30.0;
  int tsne_iters = 1000;

  bool svg = false;
  unsigned threads = 1;
};

// Artifact names inside the output directory.
namespace artifact {
inline constexpr const char* cohort = "cohort.csv";
inline constexpr const char* true_labels = "true_labels.csv";
inline constexpr const char* correlation_report = "correlation_report.json";
inline constexpr const char* selection = "selection.json";
inline constexpr const char* bic_sweep = "bic_sweep.csv";
inline constexpr const char* model = "model.json";
inline constexpr const char* assignments = "assignments.csv";
inline constexpr const char* cluster_report = "cluster_report.json";
inline constexpr const char* tests = "tests.csv";
inline constexpr const char* tests_summary = "tests_summary.json";
inline constexpr const char* pca = "pca.csv";
inline constexpr const char* tsne = "tsne.csv";
inline constexpr const char* concordance = "concordance.json";
}  // namespace artifact

/// Parses "A..B". Throws ValidationError naming k-range unless 1 <= A <= B.
std::pair<std::size_t, std::size_t> parse_k_range(const std::string& text);
/// Parses a comma-separated list of tied, diag, full (no duplicates).
std::vector<gmm::CovarianceType> parse_cov_types(const std::string& text);

void run_simulate(const RunConfig& cfg, std::ostream& log);
void run_select(const RunConfig& cfg, std::ostream& log);
void run_sweep(const RunConfig& cfg, std::ostream& log);
void run_assign(const RunConfig& cfg, std::ostream& log);
void run_report(const RunConfig& cfg, std::ostream& log);
void run_test(const RunConfig& cfg, std::ostream& log);
void run_embed_pca(const RunConfig& cfg, std::ostream& log);
void run_embed_tsne(const RunConfig& cfg, std::ostream& log);
void run_concord(const RunConfig& cfg, std::ostream& log);
/// simulate (when no input is given) then select, sweep, assign, report,
/// test, embed pca, embed tsne, concord.
void run_pipeline(const RunConfig& cfg, std::ostream& log);

}  // namespace cardio::cli
