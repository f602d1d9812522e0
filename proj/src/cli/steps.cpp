#include "cardio/cli/steps.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cardio/analysis/model_choice.hpp"
#include "cardio/analysis/pairwise.hpp"
#include "cardio/analysis/pathology.hpp"
#include "cardio/analysis/summary.hpp"
#include "cardio/cohort/feature_table.hpp"
#include "cardio/cohort/simulate.hpp"
#include "cardio/concord/concordance.hpp"
#include "cardio/embed/pca.hpp"
#include "cardio/embed/standardize.hpp"
#include "cardio/embed/svg.hpp"
#include "cardio/embed/tsne.hpp"
#include "cardio/errors.hpp"
#include "cardio/gmm/serialize.hpp"
#include "cardio/gmm/sweep.hpp"
#include "cardio/rng.hpp"

namespace cardio::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path artifact_path(const RunConfig& cfg, const char* name) { return cfg.out / name; }

void ensure_out(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec || !fs::is_directory(cfg.out)) {
    throw ValidationError("cannot create output directory '" + cfg.out.string() + "'");
  }
}

void write_text(const fs::path& path, const std::string& text, std::ostream& log) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw ValidationError("failed writing '" + path.string() + "'");
  log << "wrote " << path.string() << '\n';
}

void write_json(const fs::path& path, const json& j, std::ostream& log) { write_text(path, j.dump(2) + "\n", log); }

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read " + std::string(what) + " '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path, const char* what) {
  const std::string text = read_text(path, what);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + " '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

cohort::FeatureTable load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
  return cohort::load_feature_table(cfg.input);
}

select::SelectionResult load_selection(const RunConfig& cfg) {
  const auto path = artifact_path(cfg, artifact::selection);
  try {
    return select::selection_from_json(read_json(path, "selection"));
  } catch (const json::exception& e) {
    throw ValidationError("selection '" + path.string() + "' is malformed: " + e.what());
  }
}

gmm::LoadedModel load_model(const RunConfig& cfg) {
  return gmm::model_from_json(read_json(artifact_path(cfg, artifact::model), "model"));
}

struct Assignments {
  std::vector<std::size_t> labels;
  std::vector<double> max_responsibility;
};

// Reads assignments.csv and checks it lines up with the table.
Assignments load_assignments(const RunConfig& cfg, const cohort::FeatureTable& table) {
  const auto path = artifact_path(cfg, artifact::assignments);
  std::istringstream in(read_text(path, "assignments"));
  std::string line;
  if (!std::getline(in, line) || line != "case_id,cluster,max_responsibility") {
    throw ValidationError("assignments '" + path.string() + "': unexpected header");
  }
  Assignments a;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::string where = "assignments line " + std::to_string(row + 2);
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw ValidationError(where + ": expected 3 fields");
    const std::string id = line.substr(0, c1);
    if (row >= table.rows() || id != table.case_ids()[row]) {
      throw ValidationError(where + ": case_id '" + id + "' does not match the input table");
    }
    std::size_t cluster = 0;
    const char* b = line.data() + c1 + 1;
    const char* e = line.data() + c2;
    if (auto r = std::from_chars(b, e, cluster); r.ec != std::errc() || r.ptr != e) {
      throw ValidationError(where + ": bad cluster index");
    }
    double resp = 0.0;
    try {
      resp = std::stod(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw ValidationError(where + ": bad max_responsibility");
    }
    a.labels.push_back(cluster);
    a.max_responsibility.push_back(resp);
    ++row;
  }
  if (row != table.rows()) {
    throw ValidationError("assignments hold " + std::to_string(row) + " rows but the table has " +
                          std::to_string(table.rows()));
  }
  return a;
}

std::vector<std::size_t> cluster_sizes(const std::vector<std::size_t>& labels) {
  std::size_t k = 0;
  for (const auto l : labels) k = std::max(k, l + 1);
  std::vector<std::size_t> sizes(k, 0);
  for (const auto l : labels) ++sizes[l];
  return sizes;
}

std::vector<std::size_t> kept_indices(const select::SelectionResult& sel) {
  const auto& catalog = cohort::FeatureCatalog::standard();
  std::vector<std::size_t> idx;
  for (const auto& name : sel.kept) idx.push_back(catalog.require_index(name));
  return idx;
}

cohort::CohortSpec cohort_spec(const RunConfig& cfg) {
  cohort::CohortSpec spec = cfg.spec.empty() ? cohort::paper_shape_spec()
                                             : cohort::cohort_spec_from_json(read_json(cfg.spec, "cohort spec"));
  if (cfg.seed_given) spec.seed = cfg.seed;
  return spec;
}

// Cases followed by the model means as center rows.
struct EmbedInput {
  Eigen::MatrixXd rows;
  std::vector<embed::RowRole> roles;
  std::vector<std::string> ids;
  std::vector<std::size_t> clusters;
  std::size_t cases = 0;
};

EmbedInput embed_input(const RunConfig& cfg, const cohort::FeatureTable& table) {
  const auto sel = load_selection(cfg);
  const auto loaded = load_model(cfg);
  if (loaded.features != sel.kept) throw ValidationError("model features do not match the selection");
  const auto assign = load_assignments(cfg, table);
  EmbedInput in;
  const Eigen::MatrixXd cases = table.columns(kept_indices(sel));
  const auto& means = loaded.model.means;
  in.cases = static_cast<std::size_t>(cases.rows());
  in.rows.resize(cases.rows() + means.rows(), cases.cols());
  in.rows << cases, means;
  in.ids = table.case_ids();
  in.clusters = assign.labels;
  in.roles.assign(in.cases, embed::RowRole::Case);
  for (Eigen::Index j = 0; j < means.rows(); ++j) {
    in.ids.push_back("center_" + std::to_string(j));
    in.clusters.push_back(static_cast<std::size_t>(j));
    in.roles.push_back(embed::RowRole::Center);
  }
  return in;
}

void write_embedding_svg(const fs::path& path, const embed::Embedding& e, const EmbedInput& in,
                         const std::string& title, std::ostream& log) {
  embed::ScatterPlot plot;
  plot.title = title;
  plot.x_label = "dimension 1";
  plot.y_label = "dimension 2";
  for (std::size_t i = 0; i < in.ids.size(); ++i) {
    const double x = e.coords(static_cast<Eigen::Index>(i), 0);
    const double y = e.coords(static_cast<Eigen::Index>(i), 1);
    if (in.roles[i] == embed::RowRole::Case) plot.points.push_back({x, y, in.clusters[i]});
    else plot.markers.push_back({x, y, std::to_string(in.clusters[i])});
  }
  std::ostringstream ss;
  embed::write_svg(ss, plot);
  write_text(path, ss.str(), log);
}

void write_embedding(const RunConfig& cfg, const char* name, const embed::Embedding& e, const EmbedInput& in,
                     const std::string& title, std::ostream& log) {
  std::ostringstream ss;
  embed::write_embedding_csv(ss, e, in.ids, in.clusters);
  write_text(artifact_path(cfg, name), ss.str(), log);
  if (cfg.svg) {
    fs::path svg = artifact_path(cfg, name);
    svg.replace_extension(".svg");
    write_embedding_svg(svg, e, in, title, log);
  }
}

}  // namespace

std::pair<std::size_t, std::size_t> parse_k_range(const std::string& text) {
  const auto bad = [&](const std::string& why) {
    return ValidationError("invalid --k-range '" + text + "': " + why);
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw bad("expected A..B");
  const auto parse = [&](std::string_view s) {
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) throw bad("bounds must be integers");
    return v;
  };
  const std::string_view view(text);
  const std::size_t a = parse(view.substr(0, dots));
  const std::size_t b = parse(view.substr(dots + 2));
  if (a < 1) throw bad("the smallest component count is 1");
  if (b < a) throw bad("upper bound is below lower bound");
  return {a, b};
}

std::vector<gmm::CovarianceType> parse_cov_types(const std::string& text) {
  std::vector<gmm::CovarianceType> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto t = gmm::parse_covariance_type(item);
    if (std::find(out.begin(), out.end(), t) != out.end()) {
      throw ValidationError("--cov-types lists '" + item + "' twice");
    }
    out.push_back(t);
  }
  if (out.empty()) throw ValidationError("--cov-types must name at least one of tied, diag, full");
  return out;
}

void run_simulate(const RunConfig& cfg, std::ostream& log) {
  const auto spec = cohort_spec(cfg);
  const auto sim = cohort::simulate_cohort(spec);
  ensure_out(cfg);
  if (!cfg.write_spec.empty()) write_json(cfg.write_spec, cohort::to_json(spec), log);
  std::ostringstream table;
  cohort::save_feature_table(sim.table, table);
  write_text(artifact_path(cfg, artifact::cohort), table.str(), log);
  std::ostringstream labels;
  labels << "case_id,component,label\n";
  for (std::size_t i = 0; i < sim.labels.size(); ++i) {
    labels << sim.table.case_ids()[i] << ',' << sim.labels[i] << ',' << spec.components[sim.labels[i]].label << '\n';
  }
  write_text(artifact_path(cfg, artifact::true_labels), labels.str(), log);
}

void run_select(const RunConfig& cfg, std::ostream& log) {
  const auto table = load_input(cfg);
  const select::Thresholds th{cfg.r_threshold, cfg.mic_threshold};
  const auto report = select::correlation_matrix(table, th, {}, cfg.threads);
  const auto sel = select::select_features(report, cohort::FeatureCatalog::standard(), cfg.drop_rule);
  ensure_out(cfg);
  write_json(artifact_path(cfg, artifact::correlation_report), select::to_json(report), log);
  write_json(artifact_path(cfg, artifact::selection), select::to_json(sel), log);
  for (const auto& d : sel.dropped) log << "dropped " << d.name << '\n';
}

void run_sweep(const RunConfig& cfg, std::ostream& log) {
  const auto table = load_input(cfg);
  const auto sel = load_selection(cfg);
  const Eigen::MatrixXd data = table.columns(kept_indices(sel));

  gmm::SweepOptions opt;
  opt.k_min = cfg.k_min;
  opt.k_max = cfg.k_max;
  opt.types = cfg.cov_types;
  opt.em.restarts = cfg.restarts;
  opt.em.tol = cfg.tol;
  opt.em.max_iter = cfg.max_iter;
  opt.em.reg = cfg.reg;
  opt.threads = cfg.threads;
  const auto result = gmm::sweep(data, opt, derive_seed(cfg.seed, "sweep"));
  for (const auto& e : result.entries) {
    if (!e.ok) log << "fit failed for " << gmm::to_string(e.type) << " k=" << e.k << ": " << e.error << '\n';
  }
  const auto choice = analysis::choose_model(result, data, cfg.small_fraction, cfg.bic_band);
  const auto& chosen = result.entries[choice.entry];

  ensure_out(cfg);
  std::ostringstream csv;
  gmm::write_sweep_csv(csv, result);
  write_text(artifact_path(cfg, artifact::bic_sweep), csv.str(), log);
  json model = gmm::to_json(*chosen.model, sel.kept);
  model["bic"] = chosen.bic;
  model["n"] = result.n;
  const auto& argmin = result.entries[*result.selected];
  model["bic_argmin"] = {{"covariance_type", std::string(gmm::to_string(argmin.type))}, {"k", argmin.k},
                         {"bic", argmin.bic}};
  model["choice"] = analysis::to_json(choice);
  model["choice"]["bic_band"] = cfg.bic_band;
  write_json(artifact_path(cfg, artifact::model), model, log);
  log << "selected " << gmm::to_string(chosen.type) << " k=" << chosen.k << '\n';
}

void run_assign(const RunConfig& cfg, std::ostream& log) {
  const auto table = load_input(cfg);
  const auto loaded = load_model(cfg);
  const auto& catalog = cohort::FeatureCatalog::standard();
  std::vector<std::size_t> idx;
  for (const auto& name : loaded.features) idx.push_back(catalog.require_index(name));
  const auto a = gmm::assign(loaded.model, table.columns(idx));
  std::ostringstream csv;
  csv << "case_id,cluster,max_responsibility\n";
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const auto label = a.hard_labels[i];
    csv << table.case_ids()[i] << ',' << label << ','
        << cohort::format_double(a.responsibilities(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(label)))
        << '\n';
  }
  ensure_out(cfg);
  write_text(artifact_path(cfg, artifact::assignments), csv.str(), log);
}

void run_report(const RunConfig& cfg, std::ostream& log) {
  const auto table = load_input(cfg);
  const auto assign = load_assignments(cfg, table);
  auto summaries = analysis::summarize_clusters(table, assign.labels);
  analysis::flag_small_clusters(summaries, cfg.small_fraction);
  const analysis::PathologyRules rules;
  const auto profiles = analysis::cluster_pathology_profile(table, assign.labels, rules);

  json clusters = json::array();
  json small = json::array();
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    json c = analysis::to_json(summaries[i]);
    c["pathology"] = analysis::to_json(profiles[i]);
    if (summaries[i].small) {
      small.push_back({{"cluster", summaries[i].cluster},
                       {"size", summaries[i].size},
                       {"dominant", c["pathology"]["dominant"]}});
    }
    clusters.push_back(std::move(c));
  }
  json report;
  report["n"] = table.rows();
  report["small_fraction"] = cfg.small_fraction;
  report["small_threshold"] = analysis::small_threshold(table.rows(), cfg.small_fraction);
  report["rules"] = {{"rva", {{"v_rvc_ed_above", rules.rva_volume}, {"ef_rvc_below", rules.rva_ef}}},
                     {"dcm", {{"v_lvc_ed_above", rules.dcm_volume}, {"ef_lvc_below", rules.dcm_ef}}},
                     {"hcm_partial", {{"mt_lvm_ed_above", rules.hcm_thickness}, {"ef_lvc_at_least", rules.hcm_ef}}}};
  report["small_clusters"] = std::move(small);
  report["clusters"] = std::move(clusters);
  ensure_out(cfg);
  write_json(artifact_path(cfg, artifact::cluster_report), report, log);
}

void run_test(const RunConfig& cfg, std::ostream& log) {
  const auto table = load_input(cfg);
  const auto sel = load_selection(cfg);
  const auto assign = load_assignments(cfg, table);
  const auto sizes = cluster_sizes(assign.labels);
  const std::size_t threshold = analysis::small_threshold(table.rows(), cfg.small_fraction);
  std::vector<std::size_t> large;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] > threshold && sizes[c] >= 2) large.push_back(c);
  }
  ensure_out(cfg);
  json summary;
  summary["alpha"] = cfg.alpha;
  summary["clusters"] = large;
  summary["features"] = sel.kept;
  if (large.size() < 2) {
    write_text(artifact_path(cfg, artifact::tests), "cluster_a,cluster_b,feature,test,p\n", log);
    summary["cells"] = 0;
    summary["note"] = "fewer than two large clusters";
  } else {
    const auto m = analysis::pairwise_tests(table, assign.labels, large, kept_indices(sel), cfg.alpha, cfg.threads);
    std::ostringstream csv;
    analysis::write_tests_csv(csv, m);
    write_text(artifact_path(cfg, artifact::tests), csv.str(), log);
    const auto counts = [](const analysis::TestCounts& c) {
      return json{{"below", c.below}, {"above", c.above}, {"not_computable", c.not_computable}};
    };
    summary["cells"] = m.cells.size();
    summary["welch"] = counts(m.welch);
    summary["mannwhitney"] = counts(m.mann_whitney);
    log << "welch p < " << cfg.alpha << ": " << m.welch.below << "/" << m.cells.size() << '\n';
  }
  write_json(artifact_path(cfg, artifact::tests_summary), summary, log);
}

void run_embed_pca(const RunConfig& cfg, std::ostream& log) {
  const auto table = load_input(cfg);
  const auto in = embed_input(cfg, table);
  const Eigen::MatrixXd cases = in.rows.topRows(static_cast<Eigen::Index>(in.cases));
  const auto model = embed::pca_fit(cases, 2, load_selection(cfg).kept);
  const auto e = embed::pca_project(model, in.rows, in.roles);
  ensure_out(cfg);
  write_embedding(cfg, artifact::pca, e, in, "PCA", log);
}

void run_embed_tsne(const RunConfig& cfg, std::ostream& log) {
  const auto table = load_input(cfg);
  const auto in = embed_input(cfg, table);
  const Eigen::MatrixXd cases = in.rows.topRows(static_cast<Eigen::Index>(in.cases));
  const auto s = embed::standardize(cases, load_selection(cfg).kept);
  embed::TsneOptions opt;
  opt.perplexity = cfg.perplexity;
  opt.iters = cfg.tsne_iters;
  opt.threads = cfg.threads;
  auto result = embed::tsne(s.params.apply(in.rows), derive_seed(cfg.seed, "tsne"), opt);
  result.embedding.roles = in.roles;
  ensure_out(cfg);
  write_embedding(cfg, artifact::tsne, result.embedding, in, "t-SNE", log);
  log << "t-SNE KL " << result.embedding.kl << '\n';
}

void run_concord(const RunConfig& cfg, std::ostream& log) {
  const auto table = load_input(cfg);
  const auto report = concord::summary_compare(table);
  ensure_out(cfg);
  write_json(artifact_path(cfg, artifact::concordance), concord::to_json(report), log);
  for (const auto& m : report.measures) {
    const auto data = concord::scatter_data(m.pipeline, m.reference, m.fit);
    const std::string stem = "concordance_" + concord::measure_name(m.measure);
    std::ostringstream csv;
    concord::write_scatter_csv(csv, data);
    write_text(cfg.out / (stem + ".csv"), csv.str(), log);
    if (cfg.svg) {
      std::ostringstream svg;
      embed::write_svg(svg, concord::scatter_plot(data, concord::measure_name(m.measure)));
      write_text(cfg.out / (stem + ".svg"), svg.str(), log);
    }
  }
}

void run_pipeline(const RunConfig& cfg, std::ostream& log) {
  RunConfig c = cfg;
  if (c.input.empty()) {
    if (c.spec.empty()) throw ValidationError("pipeline needs --input or --spec");
    run_simulate(c, log);
    c.input = c.out / artifact::cohort;
  }
  run_select(c, log);
  run_sweep(c, log);
  run_assign(c, log);
  run_report(c, log);
  run_test(c, log);
  run_embed_pca(c, log);
  run_embed_tsne(c, log);
  const auto table = cohort::load_feature_table(c.input);
  if (table.complete_reference_rows().size() >= 3) {
    run_concord(c, log);
  } else {
    log << "skipping concord: fewer than 3 rows with reference values\n";
  }
}

}  // namespace cardio::cli
