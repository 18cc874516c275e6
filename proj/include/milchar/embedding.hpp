#pragma once

// Classical (Torgerson) scaling of a distance matrix and least-squares
// placement of a new point into an existing embedding.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "milchar/distance.hpp"
#include "milchar/error.hpp"
#include "milchar/linalg.hpp"
#include "milchar/optim.hpp"
#include "milchar/text.hpp"

namespace milchar {

struct Embedding {
  std::vector<std::string> names;
  Eigen::MatrixXd coords;  // one row per name
  double stress = 0.0;
};

// sqrt( sum_{i<j} (d_ij - |c_i - c_j|)^2 / sum_{i<j} d_ij^2 ). When every
// input distance is zero the denominator is dropped.
inline double stress(const Eigen::MatrixXd& coords, const DistanceMatrix& dist) {
  const auto n = static_cast<Eigen::Index>(dist.size());
  if (coords.rows() != n || dist.values.rows() != n) throw UsageError("stress: coordinate and distance shapes differ");
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = dist.values(i, j);
      const double e = (coords.row(i) - coords.row(j)).norm();
      num += (d - e) * (d - e);
      den += d * d;
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Double-centres the squared distances and keeps the top `dim` eigenpairs.
// Axes with negative eigenvalues collapse to zero. Each axis is oriented so
// that its largest-magnitude loading is positive.
inline Embedding classical_mds(const DistanceMatrix& dist, int dim = 2) {
  dist.validate();
  const auto n = static_cast<Eigen::Index>(dist.size());
  if (n < 3) throw UsageError("classical MDS needs at least 3 items");
  if (dim < 1 || dim > n - 1) throw UsageError("embedding dimension must be between 1 and n-1");

  const Eigen::MatrixXd d2 = dist.values.array().square();
  const Eigen::VectorXd row_mean = d2.rowwise().mean();
  const double grand = d2.mean();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -0.5 * (d2(i, j) - row_mean(i) - row_mean(j) + grand);
  }
  const auto eig = jacobi_eigen(b);

  Embedding e;
  e.names = dist.names;
  e.coords = Eigen::MatrixXd::Zero(n, dim);
  for (int k = 0; k < dim; ++k) {
    Eigen::VectorXd v = eig.vectors.col(k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    const double lambda = eig.values(k);
    if (lambda > 0.0) e.coords.col(k) = v * std::sqrt(lambda);
  }
  e.stress = stress(e.coords, dist);
  return e;
}

struct Placement {
  Eigen::VectorXd coords;
  double residual = 0.0;  // sum_i (|z - c_i| - d_i)^2
  int start = 0;          // index of the winning start
};

inline double placement_residual(const Eigen::MatrixXd& base, std::span<const double> dists, const Eigen::VectorXd& z) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < base.rows(); ++i) {
    const double r = (base.row(i).transpose() - z).norm() - dists[static_cast<std::size_t>(i)];
    s += r * r;
  }
  return s;
}

// Minimizes sum_i (|z - c_i| - d_i)^2 by Nelder-Mead from the centroid and
// the centroid moved by +/- one spread along each of the first two axes.
inline Placement out_of_sample(const Embedding& base, std::span<const double> dists) {
  const auto n = base.coords.rows();
  if (static_cast<Eigen::Index>(dists.size()) != n) {
    throw UsageError("out_of_sample: " + std::to_string(dists.size()) + " distances for " + std::to_string(n) +
                     " embedded points");
  }
  for (double d : dists) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw DataError("out_of_sample: distances must be finite and nonnegative");
  }
  const Eigen::VectorXd centroid = base.coords.colwise().mean().transpose();
  double spread = std::sqrt((base.coords.rowwise() - centroid.transpose()).rowwise().squaredNorm().mean());
  if (!(spread > 0.0)) {
    double mean_d = 0.0;
    for (double d : dists) mean_d += d;
    mean_d /= static_cast<double>(std::max<Eigen::Index>(n, 1));
    spread = mean_d > 0.0 ? mean_d : 1.0;
  }

  std::vector<Eigen::VectorXd> starts{centroid};
  const Eigen::Index axes = std::min<Eigen::Index>(2, centroid.size());
  for (Eigen::Index a = 0; a < axes; ++a) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd s = centroid;
      s(a) += sign * spread;
      starts.push_back(std::move(s));
    }
  }

  auto objective = [&](const Eigen::VectorXd& z) { return placement_residual(base.coords, dists, z); };
  optim::NelderMeadOptions opt;
  opt.max_iter = 500;
  opt.tol = 1e-10;
  Placement best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < starts.size(); ++k) {
    auto r = optim::nelder_mead(objective, starts[k], spread, opt);
    if (r.value < best.residual) {
      best.coords = r.x;
      best.residual = r.value;
      best.start = static_cast<int>(k);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Embedding CSV: "name,x,y" rows followed by "# stress=<value>".

inline std::string format_embedding_csv(const Embedding& e) {
  if (e.coords.cols() != 2) throw UsageError("embedding CSV holds 2D coordinates only");
  std::string out = "name,x,y\n";
  for (std::size_t i = 0; i < e.names.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out += e.names[i] + ',' + text::format_double(e.coords(r, 0)) + ',' + text::format_double(e.coords(r, 1)) + '\n';
  }
  out += "# stress=" + text::format_double(e.stress) + '\n';
  return out;
}

// Base rows carry marker 0, the placed dataset marker 1.
inline std::string format_placement_csv(const Embedding& base, const std::string& name, const Placement& p) {
  std::string out = "name,x,y,oos\n";
  for (std::size_t i = 0; i < base.names.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out += base.names[i] + ',' + text::format_double(base.coords(r, 0)) + ',' +
           text::format_double(base.coords(r, 1)) + ",0\n";
  }
  out += name + ',' + text::format_double(p.coords(0)) + ',' + text::format_double(p.coords(1)) + ",1\n";
  out += "# stress=" + text::format_double(base.stress) + '\n';
  out += "# oos_residual=" + text::format_double(p.residual) + '\n';
  return out;
}

inline Embedding parse_embedding_csv(std::string_view content, std::string_view source = "<memory>") {
  auto lines = text::split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  auto fail = [&](std::size_t line, const std::string& msg) {
    return DataError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
  };
  if (lines.empty() || text::strip_cr(lines[0]) != "name,x,y") throw fail(1, "header must be 'name,x,y'");
  Embedding e;
  std::vector<std::pair<double, double>> xy;
  bool have_stress = false;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto line = text::strip_cr(lines[li]);
    if (line.starts_with("#")) {
      const auto body = text::trim(line.substr(1));
      if (body.starts_with("stress=")) {
        auto v = text::parse_double(body.substr(7));
        if (!v || *v < 0.0) throw fail(li + 1, "bad stress value");
        e.stress = *v;
        have_stress = true;
      }
      continue;
    }
    const auto cells = text::split(line, ',');
    if (cells.size() != 3) throw fail(li + 1, "expected name,x,y");
    auto x = text::parse_double(cells[1]);
    auto y = text::parse_double(cells[2]);
    if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) throw fail(li + 1, "bad coordinate");
    e.names.emplace_back(cells[0]);
    xy.emplace_back(*x, *y);
  }
  if (!have_stress) throw fail(lines.size(), "missing '# stress=' line");
  e.coords.resize(static_cast<Eigen::Index>(xy.size()), 2);
  for (std::size_t i = 0; i < xy.size(); ++i) {
    e.coords(static_cast<Eigen::Index>(i), 0) = xy[i].first;
    e.coords(static_cast<Eigen::Index>(i), 1) = xy[i].second;
  }
  return e;
}

inline Embedding load_embedding_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("embedding file not found: '" + path.string() + "'");
  return parse_embedding_csv(text::read_file(path), path.string());
}

}  // namespace milchar
