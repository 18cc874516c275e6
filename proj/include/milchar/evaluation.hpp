#pragma once

// Cross-validated evaluation of the classifier zoo and the EvalMatrix file
// format.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "milchar/classifiers.hpp"
#include "milchar/data.hpp"
#include "milchar/error.hpp"
#include "milchar/rng.hpp"
#include "milchar/roc.hpp"
#include "milchar/text.hpp"

namespace milchar {

// Test-fold scores of one fold, in dataset bag order.
struct FoldScores {
  std::vector<std::size_t> bag_indices;
  std::vector<int> labels;
  std::vector<double> scores;

  friend bool operator==(const FoldScores&, const FoldScores&) = default;
};

struct CvResult {
  RocCurve roc;
  double auc = 0.0;
  std::vector<FoldScores> folds;

  friend bool operator==(const CvResult&, const CvResult&) = default;
};

inline void check_fold_preconditions(const MilDataset& ds, std::size_t folds) {
  if (folds < 2) throw UsageError("cross-validation needs at least 2 folds");
  std::size_t n_pos = 0;
  for (const auto& b : ds.bags()) n_pos += b.positive() ? 1 : 0;
  const std::size_t n_neg = ds.size() - n_pos;
  if (n_pos < folds || n_neg < folds) {
    throw DataError("dataset '" + ds.name() + "' has " + std::to_string(n_pos) + " positive and " +
                    std::to_string(n_neg) + " negative bags, too few for " + std::to_string(folds) + " folds");
  }
}

// Stratified assignment: the bags of each class are shuffled with a stream
// keyed by (seed, dataset name) and dealt round-robin to the folds.
inline std::vector<std::size_t> stratified_folds(const MilDataset& ds, std::size_t folds, std::uint64_t seed) {
  check_fold_preconditions(ds, folds);
  std::vector<std::size_t> fold_of(ds.size());
  for (int cls = 1; cls >= 0; --cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (to_int(ds.bags()[i].label()) == cls) members.push_back(i);
    }
    CounterRng rng(derive_key(seed, ds.name(), "folds", static_cast<std::uint64_t>(cls)));
    milchar::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < members.size(); ++k) fold_of[members[k]] = k % folds;
  }
  return fold_of;
}

// Training seed of one (dataset, classifier, fold) task.
inline std::uint64_t task_seed(std::uint64_t seed, const std::string& dataset, std::size_t classifier_index,
                               std::size_t fold) {
  return derive_key(seed, dataset, "task", static_cast<std::uint64_t>(classifier_index), static_cast<std::uint64_t>(fold));
}

// Scores of all folds are pooled into one ROC curve.
inline CvResult cross_validate(const MilDataset& ds, const ClassifierSpec& spec, std::size_t folds, std::uint64_t seed) {
  const auto fold_of = stratified_folds(ds, folds, seed);
  const std::size_t clf_index = catalog_index(spec.display_name).value_or(0);
  CvResult out;
  std::vector<double> pooled_scores(ds.size());
  std::vector<int> pooled_labels(ds.size());
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Bag> train_bags;
    FoldScores fs;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (fold_of[i] == f) {
        fs.bag_indices.push_back(i);
      } else {
        train_bags.push_back(ds.bags()[i]);
      }
    }
    const auto model = train(spec, train_bags, task_seed(seed, ds.name(), clf_index, f));
    for (auto i : fs.bag_indices) {
      const auto& bag = ds.bags()[i];
      const double s = model.score(bag);
      fs.labels.push_back(to_int(bag.label()));
      fs.scores.push_back(s);
      pooled_scores[i] = s;
      pooled_labels[i] = to_int(bag.label());
    }
    out.folds.push_back(std::move(fs));
  }
  out.roc = roc_curve(pooled_scores, pooled_labels);
  out.auc = auc(out.roc);
  return out;
}

// ---------------------------------------------------------------------------

struct EvalMatrix {
  std::vector<std::string> datasets;
  std::vector<ClassifierSpec> classifiers;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<CvResult> cells;  // row-major: dataset, then classifier

  const CvResult& cell(std::size_t dataset, std::size_t classifier) const {
    return cells.at(dataset * classifiers.size() + classifier);
  }

  std::size_t dataset_index(const std::string& name) const {
    auto it = std::find(datasets.begin(), datasets.end(), name);
    if (it == datasets.end()) throw DataError("dataset '" + name + "' not in evaluation matrix");
    return static_cast<std::size_t>(it - datasets.begin());
  }

  std::size_t classifier_index(const std::string& name) const {
    for (std::size_t k = 0; k < classifiers.size(); ++k) {
      if (classifiers[k].display_name == name) return k;
    }
    throw UsageError("classifier '" + name + "' not in evaluation matrix");
  }

  // Throws unless every cell is present and consistent.
  void validate() const {
    if (cells.size() != datasets.size() * classifiers.size()) throw DataError("evaluation matrix is incomplete");
    for (const auto& c : cells) {
      if (!(c.auc >= 0.0 && c.auc <= 1.0)) throw DataError("evaluation matrix holds an AUC outside [0,1]");
      if (std::abs(c.auc - auc(c.roc)) > 1e-12) throw DataError("evaluation matrix AUC disagrees with its ROC curve");
    }
  }

  friend bool operator==(const EvalMatrix&, const EvalMatrix&) = default;
};

struct EvalOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  // Called after each finished cell, possibly from a worker thread; calls are
  // serialized.
  std::function<void(const std::string& dataset, const std::string& classifier, double auc)> on_cell;
};

inline EvalMatrix evaluate_all(std::span<const MilDataset> datasets, std::span<const ClassifierSpec> classifiers,
                               const EvalOptions& opt) {
  EvalMatrix m;
  m.folds = opt.folds;
  m.seed = opt.seed;
  m.classifiers.assign(classifiers.begin(), classifiers.end());
  for (const auto& ds : datasets) {
    if (std::find(m.datasets.begin(), m.datasets.end(), ds.name()) != m.datasets.end()) {
      throw UsageError("duplicate dataset name '" + ds.name() + "'");
    }
    m.datasets.push_back(ds.name());
    try {
      check_fold_preconditions(ds, opt.folds);
    } catch (const Error& e) {
      throw DataError(std::string("cell (") + ds.name() + ", *): " + e.what());
    }
  }

  const std::size_t n_cells = datasets.size() * classifiers.size();
  m.cells.resize(n_cells);
  std::vector<std::exception_ptr> errors(n_cells);
  std::atomic<std::size_t> next{0};
  std::mutex report;

  auto worker = [&] {
    for (std::size_t c = next++; c < n_cells; c = next++) {
      const auto& ds = datasets[c / classifiers.size()];
      const auto& spec = classifiers[c % classifiers.size()];
      try {
        m.cells[c] = cross_validate(ds, spec, opt.folds, opt.seed);
        if (opt.on_cell) {
          std::lock_guard lock(report);
          opt.on_cell(ds.name(), spec.display_name, m.cells[c].auc);
        }
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, n_cells));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  for (std::size_t c = 0; c < n_cells; ++c) {
    if (!errors[c]) continue;
    const std::string where = "cell (" + datasets[c / classifiers.size()].name() + ", " +
                              classifiers[c % classifiers.size()].display_name + "): ";
    try {
      std::rethrow_exception(errors[c]);
    } catch (const NumericalError& e) {
      throw NumericalError(where + e.what());
    } catch (const UsageError& e) {
      throw UsageError(where + e.what());
    } catch (const std::exception& e) {
      throw DataError(where + e.what());
    }
  }
  return m;
}

inline EvalMatrix evaluate_all(std::span<const MilDataset> datasets, const EvalOptions& opt) {
  return evaluate_all(datasets, catalog(), opt);
}

// ---------------------------------------------------------------------------
// Text serialization, one record per line, space-separated tokens:
//
//   milchar-evalmatrix 1
//   folds <k>
//   seed <s>
//   datasets <n> <name_1> ... <name_n>
//   classifiers <m> <name_1> ... <name_m>
//   cell <di> <ci> auc <auc> roc <p> <fpr_1> <tpr_1> ... <fpr_p> <tpr_p>
//   fold <di> <ci> <f> <q> <bag_1> <label_1> <score_1> ... <bag_q> <label_q> <score_q>
//
// Cells appear in row-major order, each followed by its fold records. Numbers
// use the shortest round-trip decimal form.

inline constexpr std::string_view kEvalMatrixMagic = "milchar-evalmatrix";

inline std::string format_eval_matrix(const EvalMatrix& m) {
  m.validate();
  std::string out;
  out += std::string(kEvalMatrixMagic) + " 1\n";
  out += "folds " + std::to_string(m.folds) + '\n';
  out += "seed " + std::to_string(m.seed) + '\n';
  out += "datasets " + std::to_string(m.datasets.size());
  for (const auto& d : m.datasets) out += ' ' + d;
  out += "\nclassifiers " + std::to_string(m.classifiers.size());
  for (const auto& c : m.classifiers) out += ' ' + c.display_name;
  out += '\n';
  for (std::size_t di = 0; di < m.datasets.size(); ++di) {
    for (std::size_t ci = 0; ci < m.classifiers.size(); ++ci) {
      const auto& cell = m.cell(di, ci);
      out += "cell " + std::to_string(di) + ' ' + std::to_string(ci) + " auc " + text::format_double(cell.auc) +
             " roc " + std::to_string(cell.roc.points().size());
      for (const auto& p : cell.roc.points()) out += ' ' + text::format_double(p.fpr) + ' ' + text::format_double(p.tpr);
      out += '\n';
      for (std::size_t f = 0; f < cell.folds.size(); ++f) {
        const auto& fs = cell.folds[f];
        out += "fold " + std::to_string(di) + ' ' + std::to_string(ci) + ' ' + std::to_string(f) + ' ' +
               std::to_string(fs.scores.size());
        for (std::size_t k = 0; k < fs.scores.size(); ++k) {
          out += ' ' + std::to_string(fs.bag_indices[k]) + ' ' + std::to_string(fs.labels[k]) + ' ' +
                 text::format_double(fs.scores[k]);
        }
        out += '\n';
      }
    }
  }
  return out;
}

namespace detail {

class TokenReader {
 public:
  TokenReader(std::string_view line, std::size_t line_no) : tokens_(text::split(line, ' ')), line_no_(line_no) {}

  std::string_view next() {
    if (pos_ >= tokens_.size()) throw error("unexpected end of record");
    return tokens_[pos_++];
  }
  void expect(std::string_view word) {
    if (next() != word) throw error("expected '" + std::string(word) + "'");
  }
  template <typename Int>
  Int integer() {
    auto v = text::parse_int<Int>(next());
    if (!v) throw error("expected an integer");
    return *v;
  }
  double real() {
    auto v = text::parse_double(next());
    if (!v) throw error("expected a number");
    return *v;
  }
  void finish() {
    if (pos_ != tokens_.size()) throw error("trailing tokens");
  }
  DataError error(const std::string& msg) const {
    return DataError("evaluation matrix line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::vector<std::string_view> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

}  // namespace detail

inline EvalMatrix parse_eval_matrix(std::string_view content) {
  auto lines = text::split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 5) throw DataError("evaluation matrix: truncated header");
  EvalMatrix m;
  {
    detail::TokenReader r(text::strip_cr(lines[0]), 1);
    r.expect(kEvalMatrixMagic);
    r.expect("1");
    r.finish();
  }
  {
    detail::TokenReader r(text::strip_cr(lines[1]), 2);
    r.expect("folds");
    m.folds = r.integer<std::size_t>();
    r.finish();
  }
  {
    detail::TokenReader r(text::strip_cr(lines[2]), 3);
    r.expect("seed");
    m.seed = r.integer<std::uint64_t>();
    r.finish();
  }
  {
    detail::TokenReader r(text::strip_cr(lines[3]), 4);
    r.expect("datasets");
    const auto n = r.integer<std::size_t>();
    for (std::size_t i = 0; i < n; ++i) m.datasets.emplace_back(r.next());
    r.finish();
  }
  {
    detail::TokenReader r(text::strip_cr(lines[4]), 5);
    r.expect("classifiers");
    const auto n = r.integer<std::size_t>();
    for (std::size_t i = 0; i < n; ++i) {
      const auto name = r.next();
      if (!catalog_index(name)) throw r.error("unknown classifier '" + std::string(name) + "'");
      m.classifiers.push_back(find_classifier(name));
    }
    r.finish();
  }

  const std::size_t n_cells = m.datasets.size() * m.classifiers.size();
  m.cells.resize(n_cells);
  std::size_t cell = 0;
  std::size_t line = 5;
  while (line < lines.size()) {
    if (cell >= n_cells) throw DataError("evaluation matrix line " + std::to_string(line + 1) + ": too many cells");
    detail::TokenReader r(text::strip_cr(lines[line]), line + 1);
    r.expect("cell");
    const auto di = r.integer<std::size_t>();
    const auto ci = r.integer<std::size_t>();
    if (di * m.classifiers.size() + ci != cell) throw r.error("cells out of order");
    r.expect("auc");
    auto& c = m.cells[cell];
    c.auc = r.real();
    r.expect("roc");
    const auto np = r.integer<std::size_t>();
    std::vector<RocPoint> pts;
    for (std::size_t k = 0; k < np; ++k) {
      const double f = r.real();
      const double t = r.real();
      pts.push_back({f, t});
    }
    r.finish();
    c.roc = RocCurve(std::move(pts));
    ++line;
    while (line < lines.size() && text::strip_cr(lines[line]).starts_with("fold ")) {
      detail::TokenReader fr(text::strip_cr(lines[line]), line + 1);
      fr.expect("fold");
      if (fr.integer<std::size_t>() != di || fr.integer<std::size_t>() != ci) throw fr.error("fold of another cell");
      if (fr.integer<std::size_t>() != c.folds.size()) throw fr.error("folds out of order");
      const auto q = fr.integer<std::size_t>();
      FoldScores fs;
      for (std::size_t k = 0; k < q; ++k) {
        fs.bag_indices.push_back(fr.integer<std::size_t>());
        fs.labels.push_back(fr.integer<int>());
        fs.scores.push_back(fr.real());
      }
      fr.finish();
      c.folds.push_back(std::move(fs));
      ++line;
    }
    ++cell;
  }
  if (cell != n_cells) throw DataError("evaluation matrix is incomplete: " + std::to_string(cell) + " of " +
                                       std::to_string(n_cells) + " cells");
  m.validate();
  return m;
}

inline void save_eval_matrix(const EvalMatrix& m, const std::filesystem::path& path) {
  text::write_file_atomic(path, format_eval_matrix(m));
}

inline EvalMatrix load_eval_matrix(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("evaluation matrix not found: '" + path.string() + "'");
  return parse_eval_matrix(text::read_file(path));
}

}  // namespace milchar
