// milchar: generate MIL datasets, evaluate the classifier catalog, and turn
// the results into dataset distances, embeddings and plot tables.
//
// Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 numerical
// failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "milchar/error.hpp"
#include "milchar/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using milchar::pipeline::RunConfig;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-instance dataset characterization"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::uint64_t seed = milchar::pipeline::kDefaultSeed;
  std::size_t folds = milchar::pipeline::kDefaultFolds;
  std::string out = ".";
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (default 0)");
  auto* folds_opt = app.add_option("--folds", folds, "Cross-validation folds (default 10)")->check(CLI::Range(2, 1000));
  app.add_option("--jobs", cfg.jobs, "Parallel evaluation tasks")->check(CLI::Range(1, 4096));
  app.add_option("--out", out, "Output directory");

  bool all = false;
  auto* gen = app.add_subcommand("gen", "Write artificial datasets and their generator specs");
  gen->add_flag("--all", all, "All six generators (the default)");
  gen->add_option("--kind", cfg.kinds, "Generator kind(s): gaussian, maron, concept, difficult, rotated, widened")
      ->delimiter(',');
  gen->add_option("--spec", cfg.spec_files, "Regenerate from spec sidecar file(s)");

  auto* eval = app.add_subcommand("eval", "Cross-validate the classifier catalog on datasets");
  eval->add_option("datasets", cfg.inputs, "Dataset CSV files")->required();
  eval->add_option("--classifiers", cfg.classifiers, "Comma-separated subset of the catalog")->delimiter(',');

  auto* dist = app.add_subcommand("dist", "Write d_meta, d_auc and d_roc distance matrices");
  dist->add_option("--eval", cfg.eval_file, "Evaluation matrix file")->required();
  dist->add_option("datasets", cfg.inputs, "Dataset CSV files (for metadata)")->required();

  auto* embed = app.add_subcommand("embed", "2D classical MDS of a distance matrix");
  embed->add_option("distances", cfg.inputs, "Distance CSV")->required();

  auto* oos = app.add_subcommand("oos", "Place a new dataset into an existing embedding");
  oos->add_option("--eval", cfg.eval_file, "Base evaluation matrix")->required();
  oos->add_option("--embedding", cfg.embedding_file, "Base embedding CSV")->required();
  oos->add_option("--metric", cfg.metric, "Distance behind the embedding")
      ->check(CLI::IsMember({"roc", "auc"}));
  oos->add_option("dataset", cfg.inputs, "New dataset CSV")->required();

  auto* diversity = app.add_subcommand("diversity", "Classifier correlation and PCA tables");
  diversity->add_option("--eval", cfg.eval_file, "Evaluation matrix file")->required();

  auto* plot = app.add_subcommand("plotdata", "Embedding coordinates joined with AUC coloring values");
  plot->add_option("--eval", cfg.eval_file, "Evaluation matrix file")->required();
  plot->add_option("--embedding", cfg.embedding_file, "Embedding CSV")->required();
  plot->add_option("--classifier", cfg.selected, "Classifier for the selected_auc column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (seed_opt->count() > 0) cfg.seed = seed;
  if (folds_opt->count() > 0) cfg.folds = folds;
  cfg.out = out;
  cfg.progress = &std::cerr;

  try {
    std::vector<fs::path> written;
    if (gen->parsed()) {
      if (all && (!cfg.kinds.empty() || !cfg.spec_files.empty())) {
        throw milchar::UsageError("--all cannot be combined with --kind or --spec");
      }
      written = milchar::pipeline::cmd_gen(cfg);
    } else if (eval->parsed()) {
      written = milchar::pipeline::cmd_eval(cfg);
    } else if (dist->parsed()) {
      written = milchar::pipeline::cmd_dist(cfg);
    } else if (embed->parsed()) {
      written = milchar::pipeline::cmd_embed(cfg);
    } else if (oos->parsed()) {
      written = milchar::pipeline::cmd_oos(cfg);
    } else if (diversity->parsed()) {
      written = milchar::pipeline::cmd_diversity(cfg);
    } else if (plot->parsed()) {
      written = milchar::pipeline::cmd_plotdata(cfg);
    }
    for (const auto& p : written) std::cout << p.string() << '\n';
    return kOk;
  } catch (const milchar::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const milchar::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const milchar::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal failure: " << e.what() << '\n';
    return kNumerical;
  }
}
