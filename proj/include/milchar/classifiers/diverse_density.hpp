#pragma once

// Concept-learning classifiers. Both model an instance as concept-like with
// probability p(x) = exp(-sum_k s_k^2 (x_k - t_k)^2) around a target t with
// per-feature scales s. Parameters are optimized in (t, u) with
// s = kMinScale + exp(u): without the floor a feature that carries no
// evidence lets its scale vanish and its target coordinate drift freely.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "milchar/classifiers/common.hpp"
#include "milchar/optim.hpp"
#include "milchar/rng.hpp"

namespace milchar::classifiers {

struct ConceptParams {
  Eigen::VectorXd target;
  Eigen::VectorXd scale;
};

namespace dd {

inline constexpr int kRestarts = 10;
inline constexpr double kInitialScale = 0.1;
inline constexpr double kMinScale = 0.05;
inline constexpr double kMaxLogScale = 15.0;
inline constexpr double kMinDistance = 1e-12;

inline ConceptParams unpack(const Eigen::VectorXd& theta) {
  const Eigen::Index d = theta.size() / 2;
  ConceptParams c;
  c.target = theta.head(d);
  c.scale = kMinScale + theta.tail(d).array().min(kMaxLogScale).exp();
  return c;
}

inline Eigen::VectorXd pack(const Eigen::VectorXd& target, double scale) {
  const Eigen::Index d = target.size();
  Eigen::VectorXd theta(2 * d);
  theta.head(d) = target;
  theta.tail(d).setConstant(std::log(scale - kMinScale));
  return theta;
}

// Weighted squared distance of each row of x to the target.
inline Eigen::VectorXd weighted_distance(const Eigen::MatrixXd& x, const ConceptParams& c) {
  const Eigen::ArrayXd s2 = c.scale.array().square();
  return ((x.rowwise() - c.target.transpose()).array().square().rowwise() * s2.transpose()).rowwise().sum();
}

// log(1 - exp(-dist)), accurate at both ends.
inline double log_q(double dist) {
  dist = std::max(dist, kMinDistance);
  return dist > 0.6931471805599453 ? std::log1p(-std::exp(-dist)) : std::log(-std::expm1(-dist));
}

// Accumulates the gradient of sum_j weight_j * dist_j with respect to theta.
inline void add_distance_gradient(const Eigen::MatrixXd& x, const ConceptParams& c, const Eigen::VectorXd& weight,
                                  Eigen::VectorXd& grad) {
  const Eigen::Index d = c.target.size();
  const Eigen::ArrayXd s2 = c.scale.array().square();
  const Eigen::ArrayXXd diff = (x.rowwise() - c.target.transpose()).array();
  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::ArrayXd dk = diff.col(k);
    grad(k) += -2.0 * s2(k) * (weight.array() * dk).sum();
    grad(d + k) += 2.0 * c.scale(k) * (c.scale(k) - kMinScale) * (weight.array() * dk.square()).sum();
  }
}

// Negative log noisy-or diverse density over whole bags.
inline double noisy_or_nll(const detail::PreparedBags& p, const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
  const auto c = unpack(theta);
  if (grad) grad->setZero(theta.size());
  double nll = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& x = p.bags[i];
    const Eigen::VectorXd dist = weighted_distance(x, c);
    Eigen::VectorXd lq(dist.size());
    for (Eigen::Index j = 0; j < dist.size(); ++j) lq(j) = log_q(dist(j));
    const double log_all_neg = lq.sum();
    Eigen::VectorXd w(dist.size());
    if (p.labels[i]) {
      const double bag_p = std::max(-std::expm1(log_all_neg), 1e-300);
      nll -= std::log(bag_p);
      // d(-log P)/d dist_j = Q * p_j / (q_j * P)
      for (Eigen::Index j = 0; j < dist.size(); ++j) {
        const double pj = std::exp(-std::max(dist(j), kMinDistance));
        w(j) = std::exp(log_all_neg - lq(j)) * pj / bag_p;
      }
    } else {
      nll -= log_all_neg;
      // d(-log q_j)/d dist_j = -p_j / q_j
      for (Eigen::Index j = 0; j < dist.size(); ++j) {
        const double dj = std::max(dist(j), kMinDistance);
        w(j) = -std::exp(-dj - lq(j));
      }
    }
    if (grad) add_distance_gradient(x, c, w, *grad);
  }
  return nll;
}

// Starting targets: distinct positive-bag instances drawn with the seed.
inline std::vector<Eigen::VectorXd> starting_targets(const detail::PreparedBags& p, std::uint64_t seed) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p.labels[i]) continue;
    for (auto r = p.offsets[i]; r < p.offsets[i + 1]; ++r) rows.push_back(r);
  }
  CounterRng rng(derive_key(seed, "concept-starts"));
  milchar::shuffle(rows.begin(), rows.end(), rng);
  if (rows.size() > static_cast<std::size_t>(kRestarts)) rows.resize(kRestarts);
  std::vector<Eigen::VectorXd> out;
  for (auto r : rows) out.push_back(p.stacked.row(r).transpose());
  return out;
}

}  // namespace dd

// Maximizes the noisy-or diverse density from several starts; the bag score
// is the fitted bag-positive probability.
class DiverseDensity final : public BagScorer {
 public:
  static std::unique_ptr<DiverseDensity> train(std::span<const Bag> bags, std::uint64_t seed) {
    const auto p = detail::prepare(bags);
    auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* g) { return dd::noisy_or_nll(p, theta, g); };
    optim::LbfgsOptions opt;
    opt.max_iter = 300;
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    for (const auto& start : dd::starting_targets(p, seed)) {
      auto r = optim::lbfgs(objective, dd::pack(start, dd::kInitialScale), opt);
      if (r.value < best) {
        best = r.value;
        best_theta = r.x;
      }
    }
    auto m = std::make_unique<DiverseDensity>();
    m->scaler_ = p.scaler;
    m->concept_ = dd::unpack(best_theta);
    return m;
  }

  double score(const Eigen::MatrixXd& x) const override {
    const Eigen::VectorXd dist = dd::weighted_distance(scaler_.transform(x), concept_);
    double log_all_neg = 0.0;
    for (Eigen::Index j = 0; j < dist.size(); ++j) {
      if (dist(j) <= 0.0) return 1.0;
      log_all_neg += dd::log_q(dist(j));
    }
    return -std::expm1(log_all_neg);
  }

  std::optional<Eigen::VectorXd> concept_location() const override { return scaler_.inverse_row(concept_.target); }
  const ConceptParams& concept_params() const noexcept { return concept_; }

 private:
  Standardizer scaler_;
  ConceptParams concept_;
};

// EM-DD: alternate between picking the most concept-like instance of every bag
// and fitting single-instance diverse density to those picks. The bag score is
// the probability of its most concept-like instance.
class Emdd final : public BagScorer {
 public:
  static constexpr int kMaxEmIterations = 20;
  static constexpr double kMoveTolerance = 1e-6;

  static std::unique_ptr<Emdd> train(std::span<const Bag> bags, std::uint64_t seed) {
    const auto p = detail::prepare(bags);
    optim::LbfgsOptions opt;
    opt.max_iter = 200;
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    for (const auto& start : dd::starting_targets(p, seed)) {
      Eigen::VectorXd theta = dd::pack(start, dd::kInitialScale);
      double value = std::numeric_limits<double>::infinity();
      for (int it = 0; it < kMaxEmIterations; ++it) {
        const Eigen::MatrixXd picked = select(p, dd::unpack(theta));
        auto objective = [&](const Eigen::VectorXd& th, Eigen::VectorXd* g) {
          return single_instance_nll(picked, p.labels, th, g);
        };
        auto r = optim::lbfgs(objective, theta, opt);
        // EM-DD is not monotone; stop at the first step that does not improve.
        const double v = max_instance_nll(p, dd::unpack(r.x));
        if (!(v < value)) break;
        const double moved = (r.x.head(p.dim()) - theta.head(p.dim())).norm();
        value = v;
        theta = r.x;
        if (moved < kMoveTolerance) break;
      }
      if (value < best) {
        best = value;
        best_theta = theta;
      }
    }
    auto m = std::make_unique<Emdd>();
    m->scaler_ = p.scaler;
    m->concept_ = dd::unpack(best_theta);
    return m;
  }

  double score(const Eigen::MatrixXd& x) const override {
    const Eigen::VectorXd dist = dd::weighted_distance(scaler_.transform(x), concept_);
    return std::exp(-dist.minCoeff());
  }

  std::optional<Eigen::VectorXd> concept_location() const override { return scaler_.inverse_row(concept_.target); }
  const ConceptParams& concept_params() const noexcept { return concept_; }

 private:
  static Eigen::MatrixXd select(const detail::PreparedBags& p, const ConceptParams& c) {
    Eigen::MatrixXd picked(static_cast<Eigen::Index>(p.size()), p.dim());
    for (std::size_t i = 0; i < p.size(); ++i) {
      Eigen::Index j = 0;
      dd::weighted_distance(p.bags[i], c).minCoeff(&j);
      picked.row(static_cast<Eigen::Index>(i)) = p.bags[i].row(j);
    }
    return picked;
  }

  // Positive picks contribute -log p = dist, negative picks -log(1 - p).
  static double single_instance_nll(const Eigen::MatrixXd& picked, const std::vector<int>& labels,
                                    const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    const auto c = dd::unpack(theta);
    const Eigen::VectorXd dist = dd::weighted_distance(picked, c);
    Eigen::VectorXd w(dist.size());
    double nll = 0.0;
    for (Eigen::Index i = 0; i < dist.size(); ++i) {
      if (labels[static_cast<std::size_t>(i)]) {
        nll += dist(i);
        w(i) = 1.0;
      } else {
        const double lq = dd::log_q(dist(i));
        nll -= lq;
        w(i) = -std::exp(-std::max(dist(i), dd::kMinDistance) - lq);
      }
    }
    if (grad) {
      grad->setZero(theta.size());
      dd::add_distance_gradient(picked, c, w, *grad);
    }
    return nll;
  }

  static double max_instance_nll(const detail::PreparedBags& p, const ConceptParams& c) {
    double nll = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double dmin = dd::weighted_distance(p.bags[i], c).minCoeff();
      nll += p.labels[i] ? dmin : -dd::log_q(dmin);
    }
    return nll;
  }

  Standardizer scaler_;
  ConceptParams concept_;
};

}  // namespace milchar::classifiers
