#pragma once

// Dataset-to-dataset distances (metadata, AUC vectors, ROC differences) and
// the classifier-diversity diagnostics built on the per-classifier ROC
// differences.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "milchar/error.hpp"
#include "milchar/evaluation.hpp"
#include "milchar/linalg.hpp"
#include "milchar/roc.hpp"
#include "milchar/text.hpp"

namespace milchar {

struct DistanceMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;

  std::size_t size() const noexcept { return names.size(); }
  double operator()(std::size_t i, std::size_t j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  void validate() const {
    const auto n = static_cast<Eigen::Index>(names.size());
    if (values.rows() != n || values.cols() != n) throw DataError("distance matrix shape does not match its names");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (values(i, i) != 0.0) throw DataError("distance matrix has a nonzero diagonal");
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(values(i, j)) || values(i, j) < 0.0) throw DataError("distance matrix entry is negative or not finite");
        if (std::abs(values(i, j) - values(j, i)) > 1e-12) throw DataError("distance matrix is not symmetric");
      }
    }
  }
};

namespace detail {

inline DistanceMatrix pairwise(const std::vector<std::string>& names, auto&& entry) {
  DistanceMatrix d;
  d.names = names;
  const auto n = static_cast<Eigen::Index>(names.size());
  d.values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      d.values(i, j) = v;
      d.values(j, i) = v;
    }
  }
  return d;
}

inline void require_complete(const EvalMatrix& m) {
  if (m.cells.size() != m.datasets.size() * m.classifiers.size()) throw DataError("evaluation matrix is incomplete");
}

}  // namespace detail

// Euclidean distance between rows of the (normalized) metadata matrix.
inline DistanceMatrix d_meta(const Eigen::MatrixXd& metas, const std::vector<std::string>& names) {
  if (metas.rows() != static_cast<Eigen::Index>(names.size())) {
    throw UsageError("d_meta: " + std::to_string(metas.rows()) + " metadata rows for " + std::to_string(names.size()) +
                     " names");
  }
  return detail::pairwise(names, [&](std::size_t i, std::size_t j) {
    return (metas.row(static_cast<Eigen::Index>(i)) - metas.row(static_cast<Eigen::Index>(j))).norm();
  });
}

// Euclidean distance between the per-dataset AUC vectors.
inline DistanceMatrix d_auc(const EvalMatrix& m) {
  detail::require_complete(m);
  return detail::pairwise(m.datasets, [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < m.classifiers.size(); ++k) {
      const double diff = m.cell(i, k).auc - m.cell(j, k).auc;
      s += diff * diff;
    }
    return std::sqrt(s);
  });
}

// Rows: dataset pairs (i, j), i < j, in lexicographic order. Column k: area
// between the ROC curves of classifier k on the two datasets.
inline Eigen::MatrixXd per_classifier_distances(const EvalMatrix& m) {
  detail::require_complete(m);
  const std::size_t n = m.datasets.size();
  const auto rows = static_cast<Eigen::Index>(n * (n - (n > 0 ? 1 : 0)) / 2);
  Eigen::MatrixXd f(rows, static_cast<Eigen::Index>(m.classifiers.size()));
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++r) {
      for (std::size_t k = 0; k < m.classifiers.size(); ++k) {
        f(r, static_cast<Eigen::Index>(k)) = roc_area_between(m.cell(i, k).roc, m.cell(j, k).roc);
      }
    }
  }
  return f;
}

namespace detail {

inline double root_sum_squares(const Eigen::MatrixXd& f, Eigen::Index row) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < f.cols(); ++k) s += f(row, k) * f(row, k);
  return std::sqrt(s);
}

}  // namespace detail

// sqrt(sum_k area_between(ROC_i^k, ROC_j^k)^2).
inline DistanceMatrix d_roc(const EvalMatrix& m) {
  const Eigen::MatrixXd f = per_classifier_distances(m);
  const std::size_t n = m.datasets.size();
  DistanceMatrix d;
  d.names = m.datasets;
  d.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++r) {
      const double v = detail::root_sum_squares(f, r);
      d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      d.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return d;
}

inline Eigen::MatrixXd classifier_correlations(const Eigen::MatrixXd& features) {
  if (features.rows() < 2) throw DataError("classifier correlations need at least 2 dataset pairs (3 datasets)");
  return column_correlations(features);
}

// PCA on the column-standardized features: eigenvalues of the correlation
// matrix, descending, as cumulative fractions of their total.
inline std::vector<double> pca_cumulative_variance(const Eigen::MatrixXd& features) {
  const Eigen::MatrixXd r = classifier_correlations(features);
  const auto eig = jacobi_eigen(r);
  std::vector<double> values;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) values.push_back(std::max(eig.values(k), 0.0));
  std::sort(values.begin(), values.end(), std::greater<>());
  double total = 0.0;
  for (double v : values) total += v;
  std::vector<double> out;
  double acc = 0.0;
  for (double v : values) {
    acc += v;
    out.push_back(acc / total);
  }
  if (!out.empty()) out.back() = 1.0;
  return out;
}

struct DiversityReport {
  std::vector<std::string> classifiers;
  Eigen::MatrixXd features;
  Eigen::MatrixXd correlations;
  std::vector<double> cumulative_variance;
};

inline DiversityReport diversity_report(const EvalMatrix& m) {
  DiversityReport r;
  for (const auto& c : m.classifiers) r.classifiers.push_back(c.display_name);
  r.features = per_classifier_distances(m);
  r.correlations = classifier_correlations(r.features);
  r.cumulative_variance = pca_cumulative_variance(r.features);
  return r;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_square_csv(const std::vector<std::string>& names, const Eigen::MatrixXd& values) {
  std::string out = "name";
  for (const auto& n : names) out += ',' + n;
  out += '\n';
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += names[i];
    for (std::size_t j = 0; j < names.size(); ++j) {
      out += ',' + text::format_double(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out += '\n';
  }
  return out;
}

inline std::string format_distance_csv(const DistanceMatrix& d) { return format_square_csv(d.names, d.values); }

inline DistanceMatrix parse_distance_csv(std::string_view content, std::string_view source = "<memory>") {
  auto lines = text::split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  auto fail = [&](std::size_t line, const std::string& msg) {
    return DataError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
  };
  if (lines.empty()) throw fail(1, "empty distance file");
  const auto header = text::split(text::strip_cr(lines[0]), ',');
  if (header.empty() || header[0] != "name") throw fail(1, "header must start with 'name'");
  DistanceMatrix d;
  for (std::size_t k = 1; k < header.size(); ++k) d.names.emplace_back(header[k]);
  const auto n = static_cast<Eigen::Index>(d.names.size());
  if (static_cast<Eigen::Index>(lines.size()) != n + 1) throw fail(lines.size(), "expected one row per name");
  d.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto cells = text::split(text::strip_cr(lines[static_cast<std::size_t>(i) + 1]), ',');
    const auto line_no = static_cast<std::size_t>(i) + 2;
    if (static_cast<Eigen::Index>(cells.size()) != n + 1) throw fail(line_no, "wrong column count");
    if (cells[0] != d.names[static_cast<std::size_t>(i)]) throw fail(line_no, "row name does not match header");
    for (Eigen::Index j = 0; j < n; ++j) {
      auto v = text::parse_double(cells[static_cast<std::size_t>(j) + 1]);
      if (!v) throw fail(line_no, "bad number");
      d.values(i, j) = *v;
    }
  }
  try {
    d.validate();
  } catch (const DataError& e) {
    throw DataError(std::string(source) + ": " + e.what());
  }
  return d;
}

inline DistanceMatrix load_distance_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("distance file not found: '" + path.string() + "'");
  return parse_distance_csv(text::read_file(path), path.string());
}

inline std::string format_cumulative_variance_csv(const std::vector<double>& fractions) {
  std::string out = "component,cumulative_fraction\n";
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    out += std::to_string(k + 1) + ',' + text::format_double(fractions[k]) + '\n';
  }
  return out;
}

}  // namespace milchar
