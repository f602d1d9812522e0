#include "cardio/cli/app.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "cardio/cli/steps.hpp"
#include "cardio/errors.hpp"
#include "json.hpp"

namespace cardio::cli {

namespace {

struct Flags {
  RunConfig cfg;
  std::string k_range = "1..15";
  std::string cov_types = "tied,diag,full";
  std::string drop_rule = "later";
};

// Every subcommand accepts the full flag set so that one flag list can be
// replayed across individual steps and `pipeline` alike.
void add_flags(CLI::App& sub, Flags& f) {
  RunConfig& c = f.cfg;
  sub.add_option("--input", c.input, "Feature table CSV");
  sub.add_option("--out", c.out, "Output directory")->capture_default_str();
  sub.add_option("--spec", c.spec, "Cohort spec JSON (simulate, pipeline)");
  sub.add_option("--write-spec", c.write_spec, "simulate: also save the cohort spec as JSON");
  sub.add_option("--seed", c.seed, "Base seed")->capture_default_str();
  sub.add_option("--r-threshold", c.r_threshold, "Flag pairs with |r| at or above this")->capture_default_str();
  sub.add_option("--mic-threshold", c.mic_threshold, "Flag pairs with MIC at or above this")->capture_default_str();
  sub.add_option("--drop-rule", f.drop_rule, "Tie-break for dropped features: later or earlier")
      ->capture_default_str();
  sub.add_option("--small-fraction", c.small_fraction, "Small-cluster size fraction")->capture_default_str();
  sub.add_option("--alpha", c.alpha, "Significance level for test counts")->capture_default_str();
  sub.add_option("--k-range", f.k_range, "Component counts to sweep, A..B")->capture_default_str();
  sub.add_option("--cov-types", f.cov_types, "Covariance structures, comma separated")->capture_default_str();
  sub.add_option("--restarts", c.restarts, "EM restarts per fit")->capture_default_str();
  sub.add_option("--tol", c.tol, "EM tolerance on mean log-likelihood")->capture_default_str();
  sub.add_option("--max-iter", c.max_iter, "EM iteration cap")->capture_default_str();
  sub.add_option("--reg", c.reg, "Covariance diagonal regularization")->capture_default_str();
  sub.add_option("--bic-band", c.bic_band, "BIC slack when choosing k by small clusters")->capture_default_str();
  sub.add_option("--perplexity", c.perplexity, "t-SNE perplexity")->capture_default_str();
  sub.add_option("--tsne-iters", c.tsne_iters, "t-SNE iterations")->capture_default_str();
  sub.add_flag("--svg", c.svg, "Also write SVG plots");
  sub.add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void finish_config(Flags& f, const CLI::App& sub) {
  RunConfig& c = f.cfg;
  const auto [lo, hi] = parse_k_range(f.k_range);
  c.k_min = lo;
  c.k_max = hi;
  c.cov_types = parse_cov_types(f.cov_types);
  if (f.drop_rule == "later") c.drop_rule = select::DropRule::LaterInCatalog;
  else if (f.drop_rule == "earlier") c.drop_rule = select::DropRule::EarlierInCatalog;
  else throw ValidationError("--drop-rule must be 'later' or 'earlier', got '" + f.drop_rule + "'");
  c.seed_given = sub.count("--seed") > 0;
  if (!(c.r_threshold > 0.0 && c.r_threshold <= 1.0)) throw ValidationError("--r-threshold must lie in (0, 1]");
  if (!(c.mic_threshold > 0.0 && c.mic_threshold <= 1.0)) throw ValidationError("--mic-threshold must lie in (0, 1]");
  if (!(c.small_fraction > 0.0 && c.small_fraction < 1.0)) throw ValidationError("--small-fraction must lie in (0, 1)");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ValidationError("--alpha must lie in (0, 1)");
  if (c.restarts < 1) throw ValidationError("--restarts must be at least 1");
  if (!(c.tol >= 0.0)) throw ValidationError("--tol must be non-negative");
  if (c.max_iter < 1) throw ValidationError("--max-iter must be at least 1");
  if (!(c.reg >= 0.0)) throw ValidationError("--reg must be non-negative");
  if (!(c.bic_band >= 0.0)) throw ValidationError("--bic-band must be non-negative");
  if (!(c.perplexity > 0.0)) throw ValidationError("--perplexity must be positive");
  if (c.tsne_iters < 1) throw ValidationError("--tsne-iters must be at least 1");
  if (c.threads == 0) c.threads = std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised cardiac cohort analysis"};
  app.name("cardioclust");
  app.require_subcommand(1);

  Flags flags;
  std::function<void(const RunConfig&, std::ostream&)> action;
  CLI::App* chosen = nullptr;
  const auto command = [&](CLI::App& parent, const std::string& name, const std::string& help,
                           void (*fn)(const RunConfig&, std::ostream&)) {
    CLI::App* sub = parent.add_subcommand(name, help);
    add_flags(*sub, flags);
    sub->callback([&, sub, fn] {
      action = fn;
      chosen = sub;
    });
    return sub;
  };
  command(app, "simulate", "Draw a synthetic cohort from a spec", run_simulate);
  command(app, "select", "Correlation report and feature selection", run_select);
  command(app, "sweep", "BIC sweep over covariance types and component counts", run_sweep);
  command(app, "assign", "Assign cases to the chosen model's clusters", run_assign);
  command(app, "report", "Cluster summaries, small clusters and pathology profiles", run_report);
  command(app, "test", "Pairwise Welch and Mann-Whitney tests between large clusters", run_test);
  CLI::App* emb = app.add_subcommand("embed", "Two-dimensional embeddings");
  emb->require_subcommand(1);
  command(*emb, "pca", "PCA with projected cluster centers", run_embed_pca);
  command(*emb, "tsne", "Exact t-SNE with appended cluster centers", run_embed_tsne);
  command(app, "concord", "Concordance with reference measures", run_concord);
  command(app, "pipeline", "All steps in order", run_pipeline);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    finish_config(flags, *chosen);
    action(flags.cfg, out);
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace cardio::cli
