#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "milchar/classifiers/common.hpp"

namespace milchar::classifiers {

// Normalized set kernel: mean RBF similarity over all instance pairs.
inline double set_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    s += (-gamma * (b.rowwise() - a.row(i)).rowwise().squaredNorm().array()).exp().sum();
  }
  return s / static_cast<double>(a.rows() * b.rows());
}

inline Eigen::MatrixXd set_kernel_gram(std::span<const Eigen::MatrixXd> bags, double gamma) {
  const auto n = static_cast<Eigen::Index>(bags.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = set_kernel(bags[static_cast<std::size_t>(i)], bags[static_cast<std::size_t>(j)], gamma);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

// Kernel ridge classifier on +/-1 bag targets with the set kernel:
// alpha = (K + lambda I)^-1 (y - mean(y)), score = sum_i alpha_i K(B, B_i) + mean(y).
class MilKernel final : public BagScorer {
 public:
  static constexpr double kRidge = 0.1;

  static std::unique_ptr<MilKernel> train(std::span<const Bag> bags, double gamma_times_dim) {
    auto p = detail::prepare(bags);
    auto m = std::make_unique<MilKernel>();
    m->scaler_ = p.scaler;
    m->gamma_ = gamma_times_dim / static_cast<double>(p.dim());
    const auto n = static_cast<Eigen::Index>(p.size());
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = p.labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    m->bias_ = y.mean();
    Eigen::MatrixXd k = set_kernel_gram(p.bags, m->gamma_);
    k.diagonal().array() += kRidge;
    m->alpha_ = k.llt().solve((y.array() - m->bias_).matrix());
    m->bags_ = std::move(p.bags);
    return m;
  }

  double score(const Eigen::MatrixXd& x) const override {
    const Eigen::MatrixXd z = scaler_.transform(x);
    double s = bias_;
    for (std::size_t i = 0; i < bags_.size(); ++i) s += alpha_(static_cast<Eigen::Index>(i)) * set_kernel(z, bags_[i], gamma_);
    return s;
  }

 private:
  Standardizer scaler_;
  double gamma_ = 1.0;
  double bias_ = 0.0;
  Eigen::VectorXd alpha_;
  std::vector<Eigen::MatrixXd> bags_;
};

}  // namespace milchar::classifiers
