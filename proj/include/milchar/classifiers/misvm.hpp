#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "milchar/classifiers/common.hpp"
#include "milchar/rng.hpp"

namespace milchar::classifiers {

struct LinearModel {
  Eigen::VectorXd w;
  double b = 0.0;
  double decision(const Eigen::RowVectorXd& x) const { return x.dot(w) + b; }
};

// Linear SVM, primal hinge loss, Pegasos-style subgradient steps:
//   min lambda/2 |w|^2 + 1/n sum max(0, 1 - y (w.x + b)),  lambda = 1/(C n).
// The bias is an extra, regularized coordinate. Each epoch visits samples in a
// seeded permutation; the returned model averages the iterates of the last
// epoch.
inline LinearModel train_linear_svm(const Eigen::MatrixXd& x, std::span<const int> y_pm, double c, int epochs,
                                    std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double lambda = 1.0 / (c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(d + 1);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::VectorXd xi(d + 1);
  std::uint64_t t = 0;
  for (int e = 0; e < epochs; ++e) {
    CounterRng rng(derive_key(seed, static_cast<std::uint64_t>(e)));
    milchar::shuffle(order.begin(), order.end(), rng);
    const bool last = e + 1 == epochs;
    for (auto i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      xi.head(d) = x.row(i).transpose();
      xi(d) = 1.0;
      const double yi = static_cast<double>(y_pm[static_cast<std::size_t>(i)]);
      const double margin = yi * w.dot(xi);
      w *= 1.0 - eta * lambda;
      if (margin < 1.0) w += eta * yi * xi;
      const double norm = w.norm();
      if (norm > radius) w *= radius / norm;
      if (last) avg += w;
    }
  }
  avg /= static_cast<double>(n);
  return {avg.head(d), avg(d)};
}

// mi-SVM: instance labels inside positive bags are latent and re-estimated
// from the current SVM until they stop changing.
class MiSvm final : public BagScorer {
 public:
  static constexpr int kEpochs = 50;
  static constexpr int kMaxOuter = 20;

  static std::unique_ptr<MiSvm> train(std::span<const Bag> bags, double c, std::uint64_t seed) {
    const auto p = detail::prepare(bags);
    std::vector<int> y;
    for (std::size_t i = 0; i < p.size(); ++i) {
      y.insert(y.end(), static_cast<std::size_t>(p.bags[i].rows()), p.labels[i] ? 1 : -1);
    }
    LinearModel model;
    for (int outer = 0; outer < kMaxOuter; ++outer) {
      model = train_linear_svm(p.stacked, y, c, kEpochs, derive_key(seed, static_cast<std::uint64_t>(outer)));
      bool changed = false;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!p.labels[i]) continue;
        Eigen::Index best_row = p.offsets[i];
        double best_value = -std::numeric_limits<double>::infinity();
        bool any_positive = false;
        std::vector<int> fresh;
        for (auto r = p.offsets[i]; r < p.offsets[i + 1]; ++r) {
          const double v = model.decision(p.stacked.row(r));
          if (v > best_value) {
            best_value = v;
            best_row = r;
          }
          fresh.push_back(v >= 0.0 ? 1 : -1);
          any_positive = any_positive || v >= 0.0;
        }
        if (!any_positive) fresh[static_cast<std::size_t>(best_row - p.offsets[i])] = 1;
        for (auto r = p.offsets[i]; r < p.offsets[i + 1]; ++r) {
          const int label = fresh[static_cast<std::size_t>(r - p.offsets[i])];
          if (y[static_cast<std::size_t>(r)] != label) {
            y[static_cast<std::size_t>(r)] = label;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    auto m = std::make_unique<MiSvm>();
    m->scaler_ = p.scaler;
    m->model_ = std::move(model);
    return m;
  }

  double score(const Eigen::MatrixXd& x) const override {
    const Eigen::VectorXd v = (scaler_.transform(x) * model_.w).array() + model_.b;
    return v.maxCoeff();
  }

 private:
  Standardizer scaler_;
  LinearModel model_;
};

}  // namespace milchar::classifiers
