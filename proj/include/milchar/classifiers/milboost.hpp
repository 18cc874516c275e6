#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "milchar/classifiers/common.hpp"
#include "milchar/logistic.hpp"
#include "milchar/optim.hpp"

namespace milchar::classifiers {

// Gradient boosting of decision stumps on instances under a noisy-or bag
// likelihood. Instance probabilities are sigmoid(sum_t alpha_t h_t(x)).
class MilBoost final : public BagScorer {
 public:
  static constexpr int kRounds = 100;
  static constexpr double kMaxStep = 5.0;
  static constexpr int kLineSearchIterations = 30;

  struct Stump {
    Eigen::Index feature = 0;
    double threshold = 0.0;
    double polarity = 1.0;  // h(x) = polarity * (x_feature > threshold ? 1 : -1)
    double alpha = 0.0;

    double operator()(double value) const { return polarity * (value > threshold ? 1.0 : -1.0); }
  };

  static std::unique_ptr<MilBoost> train(std::span<const Bag> bags) {
    const auto p = detail::prepare(bags);
    const Eigen::Index n = p.stacked.rows();
    const Eigen::Index d = p.dim();

    std::vector<std::vector<Eigen::Index>> sorted(static_cast<std::size_t>(d));
    for (Eigen::Index f = 0; f < d; ++f) {
      auto& order = sorted[static_cast<std::size_t>(f)];
      order.resize(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](auto a, auto b) { return p.stacked(a, f) < p.stacked(b, f); });
    }

    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    auto m = std::make_unique<MilBoost>();
    m->scaler_ = p.scaler;

    for (int round = 0; round < kRounds; ++round) {
      const Eigen::VectorXd w = instance_weights(p, y);
      Stump best;
      double best_gain = 0.0;
      for (Eigen::Index f = 0; f < d; ++f) {
        const auto& order = sorted[static_cast<std::size_t>(f)];
        const double total = w.sum();
        double below = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
          below += w(order[k]);
          const double lo = p.stacked(order[k], f);
          const double hi = p.stacked(order[k + 1], f);
          if (!(lo < hi)) continue;
          // sum_i w_i h(x_i) with polarity +1 is (total - below) - below
          const double gain = total - 2.0 * below;
          if (std::abs(gain) > best_gain) {
            best_gain = std::abs(gain);
            best.feature = f;
            best.threshold = 0.5 * (lo + hi);
            best.polarity = gain >= 0.0 ? 1.0 : -1.0;
          }
        }
      }
      if (best_gain <= 0.0) break;

      Eigen::VectorXd h(n);
      for (Eigen::Index r = 0; r < n; ++r) h(r) = best(p.stacked(r, best.feature));
      best.alpha = optim::golden_section([&](double a) { return -log_likelihood(p, y + a * h); }, 0.0, kMaxStep,
                                         kLineSearchIterations);
      y += best.alpha * h;
      m->stumps_.push_back(best);
    }
    return m;
  }

  double score(const Eigen::MatrixXd& x) const override {
    const Eigen::MatrixXd z = scaler_.transform(x);
    std::vector<double> sp(static_cast<std::size_t>(z.rows()));
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      double s = 0.0;
      for (const auto& st : stumps_) s += st.alpha * st(z(r, st.feature));
      sp[static_cast<std::size_t>(r)] = softplus(s);
    }
    // 1 - prod(1 - sigmoid(s)) = 1 - exp(-sum softplus(s))
    return -std::expm1(-detail::ordered_sum(std::move(sp)));
  }

  const std::vector<Stump>& stumps() const noexcept { return stumps_; }

 private:
  // Derivative of the bag log-likelihood with respect to each instance score.
  static Eigen::VectorXd instance_weights(const detail::PreparedBags& p, const Eigen::VectorXd& y) {
    Eigen::VectorXd w(y.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto begin = p.offsets[i];
      const auto end = p.offsets[i + 1];
      if (p.labels[i]) {
        double log_all_neg = 0.0;
        for (auto r = begin; r < end; ++r) log_all_neg -= softplus(y(r));
        const double bag_p = std::max(-std::expm1(log_all_neg), 1e-300);
        const double ratio = std::exp(log_all_neg) / bag_p;
        for (auto r = begin; r < end; ++r) w(r) = ratio * sigmoid(y(r));
      } else {
        for (auto r = begin; r < end; ++r) w(r) = -sigmoid(y(r));
      }
    }
    return w;
  }

  static double log_likelihood(const detail::PreparedBags& p, const Eigen::VectorXd& y) {
    double ll = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      double log_all_neg = 0.0;
      for (auto r = p.offsets[i]; r < p.offsets[i + 1]; ++r) log_all_neg -= softplus(y(r));
      ll += p.labels[i] ? std::log(std::max(-std::expm1(log_all_neg), 1e-300)) : log_all_neg;
    }
    return ll;
  }

  Standardizer scaler_;
  std::vector<Stump> stumps_;
};

}  // namespace milchar::classifiers
