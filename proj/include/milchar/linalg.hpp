#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "milchar/error.hpp"

namespace milchar {

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column k belongs to values(k)
  int sweeps = 0;
};

// Cyclic Jacobi rotations. Stops once the off-diagonal Frobenius norm drops
// below `tol` times the Frobenius norm of the input.
inline SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double tol = 1e-12, int max_sweeps = 100) {
  if (input.rows() != input.cols()) throw UsageError("jacobi_eigen needs a square matrix");
  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (sweep < max_sweeps && scale > 0.0 && off_norm() > tol * scale) {
    ++sweep;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (scale > 0.0 && off_norm() > tol * scale * 1e3) throw NumericalError("Jacobi eigen-solver did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  out.sweeps = sweep;
  return out;
}

// Per-column z-scoring fitted on training rows. Constant columns get a zero
// inverse scale, so they become 0 after transform.
class Standardizer {
 public:
  Standardizer() = default;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    const auto n = x.rows();
    s.mean_ = x.colwise().mean().transpose();
    s.inv_sd_.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = n > 1 ? (x.col(c).array() - s.mean_(c)).square().sum() / static_cast<double>(n - 1) : 0.0;
      const double sd = std::sqrt(var);
      s.inv_sd_(c) = sd > 1e-12 * std::max(1.0, std::abs(s.mean_(c))) ? 1.0 / sd : 0.0;
    }
    return s;
  }

  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const {
    return ((x.rowwise() - mean_.transpose()).array().rowwise() * inv_sd_.transpose().array()).matrix();
  }

  Eigen::VectorXd transform_row(const Eigen::VectorXd& x) const { return ((x - mean_).array() * inv_sd_.array()).matrix(); }

  // Maps a standardized point back to input units; constant columns map to
  // their mean.
  Eigen::VectorXd inverse_row(const Eigen::VectorXd& z) const {
    Eigen::VectorXd x = mean_;
    for (Eigen::Index c = 0; c < z.size(); ++c) {
      if (inv_sd_(c) != 0.0) x(c) += z(c) / inv_sd_(c);
    }
    return x;
  }

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::VectorXd& inv_sd() const noexcept { return inv_sd_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd inv_sd_;
};

// Pearson correlation of the columns. A constant column correlates 0 with
// every other column and 1 with itself.
inline Eigen::MatrixXd column_correlations(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw UsageError("correlation needs at least 2 rows");
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::VectorXd norms = centered.colwise().norm().transpose();
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      double c = 0.0;
      if (norms(i) > 0.0 && norms(j) > 0.0) {
        c = centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
        c = std::clamp(c, -1.0, 1.0);
      }
      r(i, j) = c;
      r(j, i) = c;
    }
  }
  return r;
}

}  // namespace milchar
