#pragma once

// File-level commands behind the command-line tool. Every command reads its
// inputs from RunConfig, writes into RunConfig::out and returns the paths it
// wrote.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "milchar/classifiers.hpp"
#include "milchar/data.hpp"
#include "milchar/distance.hpp"
#include "milchar/embedding.hpp"
#include "milchar/error.hpp"
#include "milchar/evaluation.hpp"
#include "milchar/synth.hpp"
#include "milchar/text.hpp"

namespace milchar::pipeline {

namespace fs = std::filesystem;

inline constexpr std::size_t kDefaultFolds = 10;
inline constexpr std::uint64_t kDefaultSeed = 0;

inline constexpr std::string_view kEvalFile = "eval_matrix.txt";
inline constexpr std::string_view kEmbeddingFile = "embedding.csv";
inline constexpr std::string_view kOosFile = "oos.csv";
inline constexpr std::string_view kPlotFile = "plotdata.csv";

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> folds;
  std::size_t jobs = 1;
  fs::path out = ".";

  std::vector<fs::path> inputs;       // dataset files, or the distance CSV for embed
  std::vector<std::string> kinds;     // gen; empty means all six
  std::vector<fs::path> spec_files;   // gen from sidecars instead of kinds
  std::vector<std::string> classifiers;  // eval filter; empty means the full catalog
  fs::path eval_file;
  fs::path embedding_file;
  std::string metric = "roc";
  std::string selected = "emdd";

  std::ostream* progress = nullptr;

  std::uint64_t seed_or_default() const { return seed.value_or(kDefaultSeed); }
  std::size_t folds_or_default() const { return folds.value_or(kDefaultFolds); }
};

namespace detail {

inline fs::path prepare_out(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw DataError("cannot create output directory '" + cfg.out.string() + "': " + ec.message());
  return cfg.out;
}

inline std::vector<MilDataset> load_all(const std::vector<fs::path>& paths) {
  std::vector<MilDataset> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(load_dataset(p));
  return out;
}

inline const fs::path& require(const fs::path& p, std::string_view what) {
  if (p.empty()) throw UsageError(std::string(what) + " is required");
  return p;
}

inline std::vector<ClassifierSpec> select_classifiers(const std::vector<std::string>& names) {
  if (names.empty()) return catalog();
  std::vector<ClassifierSpec> out;
  for (const auto& n : names) {
    const auto& spec = find_classifier(n);
    for (const auto& have : out) {
      if (have.display_name == spec.display_name) throw UsageError("classifier '" + n + "' listed twice");
    }
    out.push_back(spec);
  }
  // Keep catalog order so outputs do not depend on how the filter was typed.
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return *catalog_index(a.display_name) < *catalog_index(b.display_name);
  });
  return out;
}

}  // namespace detail

// Writes <name>.csv and <name>.spec for each requested generator.
inline std::vector<fs::path> cmd_gen(const RunConfig& cfg) {
  std::vector<GenSpec> specs;
  for (const auto& p : cfg.spec_files) specs.push_back(parse_gen_spec(text::read_file(p)));
  if (cfg.spec_files.empty()) {
    if (cfg.kinds.empty()) {
      for (auto k : kAllGenKinds) specs.push_back(default_spec(k, cfg.seed_or_default()));
    }
    for (const auto& name : cfg.kinds) {
      const auto k = parse_kind(name);
      if (!k) throw UsageError("unknown generator kind '" + name + "'");
      specs.push_back(default_spec(*k, cfg.seed_or_default()));
    }
  }
  const auto dir = detail::prepare_out(cfg);
  std::vector<fs::path> written;
  for (const auto& s : specs) {
    const auto ds = generate(s);
    const auto csv = dir / (ds.name() + ".csv");
    const auto side = dir / (ds.name() + ".spec");
    for (const auto& w : written) {
      if (w == csv) throw UsageError("dataset '" + ds.name() + "' requested twice");
    }
    save_dataset(ds, csv);
    text::write_file_atomic(side, format_gen_spec(s));
    written.push_back(csv);
    written.push_back(side);
  }
  return written;
}

inline EvalMatrix run_eval(const std::vector<MilDataset>& datasets, const std::vector<ClassifierSpec>& classifiers,
                           const RunConfig& cfg, std::size_t folds, std::uint64_t seed) {
  EvalOptions opt;
  opt.folds = folds;
  opt.seed = seed;
  opt.jobs = cfg.jobs;
  if (cfg.progress) {
    const std::size_t total = datasets.size() * classifiers.size();
    auto done = std::make_shared<std::size_t>(0);
    opt.on_cell = [out = cfg.progress, total, done](const std::string& d, const std::string& c, double a) {
      *out << '[' << ++*done << '/' << total << "] " << d << ' ' << c << " auc=" << text::format_double(a) << '\n';
      out->flush();
    };
  }
  return evaluate_all(datasets, classifiers, opt);
}

inline std::vector<fs::path> cmd_eval(const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw UsageError("eval needs at least one dataset file");
  const auto classifiers = detail::select_classifiers(cfg.classifiers);
  const auto datasets = detail::load_all(cfg.inputs);
  const auto m = run_eval(datasets, classifiers, cfg, cfg.folds_or_default(), cfg.seed_or_default());
  const auto path = detail::prepare_out(cfg) / kEvalFile;
  save_eval_matrix(m, path);
  return {path};
}

// Metadata needs the dataset files; they are matched to the matrix by name.
inline std::vector<fs::path> cmd_dist(const RunConfig& cfg) {
  const auto m = load_eval_matrix(detail::require(cfg.eval_file, "--eval"));
  if (cfg.inputs.empty()) throw UsageError("dist needs the dataset files for the metadata distance");
  const auto loaded = detail::load_all(cfg.inputs);
  std::vector<MetaVector> metas;
  for (const auto& name : m.datasets) {
    auto it = std::find_if(loaded.begin(), loaded.end(), [&](const auto& d) { return d.name() == name; });
    if (it == loaded.end()) throw DataError("no dataset file given for '" + name + "'");
    metas.push_back(meta_vector(*it));
  }
  const auto meta = d_meta(normalize_meta(metas), m.datasets);
  const auto da = d_auc(m);
  const auto dr = d_roc(m);
  for (std::size_t i = 0; i < dr.size(); ++i) {
    for (std::size_t j = 0; j < dr.size(); ++j) {
      if (da(i, j) > dr(i, j) + 1e-12) {
        throw NumericalError("d_auc exceeds d_roc for (" + m.datasets[i] + ", " + m.datasets[j] + ")");
      }
    }
  }
  const auto dir = detail::prepare_out(cfg);
  std::vector<fs::path> written{dir / "d_meta.csv", dir / "d_auc.csv", dir / "d_roc.csv"};
  text::write_file_atomic(written[0], format_distance_csv(meta));
  text::write_file_atomic(written[1], format_distance_csv(da));
  text::write_file_atomic(written[2], format_distance_csv(dr));
  return written;
}

inline std::vector<fs::path> cmd_embed(const RunConfig& cfg) {
  if (cfg.inputs.size() != 1) throw UsageError("embed takes exactly one distance CSV");
  const auto e = classical_mds(load_distance_csv(cfg.inputs.front()), 2);
  const auto path = detail::prepare_out(cfg) / kEmbeddingFile;
  text::write_file_atomic(path, format_embedding_csv(e));
  return {path};
}

// Distances from one freshly evaluated dataset (row 0 of `fresh`) to every
// dataset of `base`, in `order`.
inline std::vector<double> distances_to_base(const EvalMatrix& base, const EvalMatrix& fresh,
                                             const std::vector<std::string>& order, std::string_view metric) {
  if (metric != "roc" && metric != "auc") throw UsageError("metric must be 'roc' or 'auc'");
  std::vector<double> out;
  for (const auto& name : order) {
    const auto b = base.dataset_index(name);
    double s = 0.0;
    for (std::size_t k = 0; k < base.classifiers.size(); ++k) {
      const auto& mine = fresh.cell(0, k);
      const auto& theirs = base.cell(b, k);
      const double v = metric == "roc" ? roc_area_between(mine.roc, theirs.roc) : mine.auc - theirs.auc;
      s += v * v;
    }
    out.push_back(std::sqrt(s));
  }
  return out;
}

// Evaluates a new dataset under the base matrix's classifiers, folds and seed
// and places it into the base embedding.
inline std::vector<fs::path> cmd_oos(const RunConfig& cfg) {
  const auto base = load_eval_matrix(detail::require(cfg.eval_file, "--eval"));
  const auto emb = load_embedding_csv(detail::require(cfg.embedding_file, "--embedding"));
  if (cfg.inputs.size() != 1) throw UsageError("oos takes exactly one new dataset file");
  if (cfg.folds && *cfg.folds != base.folds) {
    throw DataError("catalog/protocol mismatch: base uses " + std::to_string(base.folds) + " folds, requested " +
                    std::to_string(*cfg.folds));
  }
  if (cfg.seed && *cfg.seed != base.seed) throw DataError("catalog/protocol mismatch: seed differs from the base");
  std::vector<ClassifierSpec> classifiers;
  for (const auto& c : base.classifiers) {
    auto idx = catalog_index(c.display_name);
    if (!idx || catalog()[*idx].family != c.family || catalog()[*idx].variant_id != c.variant_id) {
      throw DataError("catalog/protocol mismatch: unknown classifier '" + c.display_name + "' in base");
    }
    classifiers.push_back(catalog()[*idx]);
  }
  for (const auto& n : emb.names) base.dataset_index(n);

  const auto ds = load_dataset(cfg.inputs.front());
  const auto fresh = run_eval({ds}, classifiers, cfg, base.folds, base.seed);
  const auto dists = distances_to_base(base, fresh, emb.names, cfg.metric);
  const auto placement = out_of_sample(emb, dists);
  const auto path = detail::prepare_out(cfg) / kOosFile;
  text::write_file_atomic(path, format_placement_csv(emb, ds.name(), placement));
  return {path};
}

inline std::vector<fs::path> cmd_diversity(const RunConfig& cfg) {
  const auto m = load_eval_matrix(detail::require(cfg.eval_file, "--eval"));
  const auto r = diversity_report(m);
  const auto dir = detail::prepare_out(cfg);
  std::vector<fs::path> written{dir / "correlations.csv", dir / "cumulative_variance.csv"};
  text::write_file_atomic(written[0], format_square_csv(r.classifiers, r.correlations));
  text::write_file_atomic(written[1], format_cumulative_variance_csv(r.cumulative_variance));
  return written;
}

struct PlotRow {
  std::string name;
  double x = 0.0;
  double y = 0.0;
  double mean_auc = 0.0;
  double selected_auc = 0.0;
};

inline std::vector<PlotRow> plot_rows(const EvalMatrix& m, const Embedding& e, const std::string& selected) {
  const auto k = m.classifier_index(selected);
  std::vector<PlotRow> rows;
  for (std::size_t i = 0; i < e.names.size(); ++i) {
    const auto d = m.dataset_index(e.names[i]);
    std::vector<double> aucs;
    for (std::size_t c = 0; c < m.classifiers.size(); ++c) aucs.push_back(m.cell(d, c).auc);
    const auto r = static_cast<Eigen::Index>(i);
    rows.push_back({e.names[i], e.coords(r, 0), e.coords(r, 1),
                    milchar::detail::ordered_sum(aucs) / static_cast<double>(aucs.size()), m.cell(d, k).auc});
  }
  return rows;
}

inline std::string format_plot_rows(const std::vector<PlotRow>& rows) {
  std::string out = "name,x,y,mean_auc,selected_auc\n";
  for (const auto& r : rows) {
    out += r.name + ',' + text::format_double(r.x) + ',' + text::format_double(r.y) + ',' +
           text::format_double(r.mean_auc) + ',' + text::format_double(r.selected_auc) + '\n';
  }
  return out;
}

inline std::vector<fs::path> cmd_plotdata(const RunConfig& cfg) {
  const auto m = load_eval_matrix(detail::require(cfg.eval_file, "--eval"));
  const auto e = load_embedding_csv(detail::require(cfg.embedding_file, "--embedding"));
  const auto path = detail::prepare_out(cfg) / kPlotFile;
  text::write_file_atomic(path, format_plot_rows(plot_rows(m, e, cfg.selected)));
  return {path};
}

}  // namespace milchar::pipeline
