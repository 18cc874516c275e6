#pragma once

// Binary logistic classifier, the base learner of the instance- and
// bag-vector classifiers.

#include <cmath>
#include <span>

#include <Eigen/Dense>

#include "milchar/error.hpp"
#include "milchar/linalg.hpp"
#include "milchar/optim.hpp"

namespace milchar {

struct LogisticOptions {
  double l2 = 0.01;
  double l1 = 0.0;  // > 0 switches to proximal gradient
  int max_iter = 2000;
  double grad_tol = 1e-6;
};

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) noexcept { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

class LogisticRegression {
 public:
  LogisticRegression() = default;

  // Rows of x are samples, y holds 0/1 targets. Features are standardized on
  // x; the intercept is not penalized.
  static LogisticRegression fit(const Eigen::MatrixXd& x, std::span<const int> y, const LogisticOptions& opt = {}) {
    if (x.rows() != static_cast<Eigen::Index>(y.size())) throw UsageError("logistic fit: row/label count mismatch");
    if (x.rows() == 0) throw UsageError("logistic fit: empty training set");
    LogisticRegression model;
    model.scaler_ = Standardizer::fit(x);
    const Eigen::MatrixXd z = model.scaler_.transform(x);
    Eigen::VectorXd t(x.rows());
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = y[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

    const Eigen::Index p = z.cols();
    const double n = static_cast<double>(z.rows());
    auto loss = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
      const Eigen::VectorXd w = theta.head(p);
      const double b = theta(p);
      const Eigen::VectorXd s = (z * w).array() + b;
      double value = 0.0;
      Eigen::VectorXd resid(s.size());
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        value += softplus(s(i)) - t(i) * s(i);
        resid(i) = sigmoid(s(i)) - t(i);
      }
      value = value / n + 0.5 * opt.l2 * w.squaredNorm();
      if (grad) {
        grad->resize(p + 1);
        grad->head(p) = z.transpose() * resid / n + opt.l2 * w;
        (*grad)(p) = resid.sum() / n;
      }
      return value;
    };

    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(p + 1);
    const double pos_rate = t.mean();
    if (pos_rate > 0.0 && pos_rate < 1.0) theta0(p) = std::log(pos_rate / (1.0 - pos_rate));

    optim::DescentOptions dopt;
    dopt.max_iter = opt.max_iter;
    dopt.grad_tol = opt.grad_tol;
    optim::Result r;
    if (opt.l1 > 0.0) {
      Eigen::VectorXd l1 = Eigen::VectorXd::Constant(p + 1, opt.l1);
      l1(p) = 0.0;
      r = optim::proximal_gradient(loss, theta0, l1, dopt);
    } else {
      r = optim::gradient_descent(loss, theta0, dopt);
    }
    model.weights_ = r.x.head(p);
    model.bias_ = r.x(p);
    model.iterations_ = r.iterations;
    // Constant features carry no information and keep exactly zero weight.
    for (Eigen::Index c = 0; c < p; ++c) {
      if (model.scaler_.inv_sd()(c) == 0.0) model.weights_(c) = 0.0;
    }
    return model;
  }

  double decision(const Eigen::VectorXd& x) const { return scaler_.transform_row(x).dot(weights_) + bias_; }

  Eigen::VectorXd decision(const Eigen::MatrixXd& x) const {
    return (scaler_.transform(x) * weights_).array() + bias_;
  }

  double probability(const Eigen::VectorXd& x) const { return sigmoid(decision(x)); }

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }
  int iterations() const noexcept { return iterations_; }

 private:
  Standardizer scaler_;
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
  int iterations_ = 0;
};

}  // namespace milchar
