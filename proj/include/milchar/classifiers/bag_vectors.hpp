#pragma once

// Families that turn a bag into one feature vector and train the logistic
// base learner on those vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "milchar/classifiers/common.hpp"
#include "milchar/logistic.hpp"
#include "milchar/rng.hpp"

namespace milchar::classifiers {

// ---------------------------------------------------------------------------
// Embeddings. Inputs are canonical, standardized instance matrices.

inline Eigen::VectorXd bag_statistics(const Eigen::MatrixXd& x, hyper::BagStat kind) {
  const Eigen::Index d = x.cols();
  Eigen::VectorXd mean(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    std::vector<double> col(x.col(c).data(), x.col(c).data() + x.rows());
    mean(c) = detail::ordered_sum(std::move(col)) / static_cast<double>(x.rows());
  }
  const Eigen::VectorXd lo = x.colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = x.colwise().maxCoeff().transpose();
  switch (kind) {
    case hyper::BagStat::mean: return mean;
    case hyper::BagStat::min_max: {
      Eigen::VectorXd v(2 * d);
      v << lo, hi;
      return v;
    }
    case hyper::BagStat::mean_min_max: {
      Eigen::VectorXd v(3 * d);
      v << mean, lo, hi;
      return v;
    }
  }
  return mean;
}

// MILES coordinate k: max_j exp(-|x_j - prototype_k|^2 / sigma2).
inline Eigen::VectorXd miles_embedding(const Eigen::MatrixXd& x, const Eigen::MatrixXd& prototypes, double sigma2) {
  Eigen::VectorXd v(prototypes.rows());
  for (Eigen::Index k = 0; k < prototypes.rows(); ++k) {
    const double d2 = (x.rowwise() - prototypes.row(k)).rowwise().squaredNorm().minCoeff();
    v(k) = std::exp(-d2 / sigma2);
  }
  return v;
}

// Dissimilarity of bag `a` to bag `b` from their pairwise instance distances.
inline double bag_dissimilarity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, hyper::Aggregation agg) {
  std::vector<double> per_instance(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Eigen::VectorXd dist = (b.rowwise() - a.row(i)).rowwise().norm();
    per_instance[static_cast<std::size_t>(i)] =
        agg == hyper::Aggregation::mean_mean
            ? detail::ordered_sum(std::vector<double>(dist.data(), dist.data() + dist.size())) /
                  static_cast<double>(dist.size())
            : dist.minCoeff();
  }
  if (agg == hyper::Aggregation::min_min) return *std::min_element(per_instance.begin(), per_instance.end());
  const auto n = static_cast<double>(per_instance.size());
  return detail::ordered_sum(std::move(per_instance)) / n;
}

// Lloyd's k-means with k-means++ seeding. k is capped at the number of rows.
inline Eigen::MatrixXd kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int max_iter = 100) {
  const Eigen::Index n = x.rows();
  const Eigen::Index kk = std::min<Eigen::Index>(k, n);
  CounterRng rng(derive_key(seed, "kmeans"));
  Eigen::MatrixXd centers(kk, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<std::uint64_t>(n - 1))));
  Eigen::VectorXd nearest = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (Eigen::Index c = 1; c < kk; ++c) {
    const double total = nearest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += nearest(i);
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<std::uint64_t>(n - 1)));
    }
    centers.row(c) = x.row(pick);
    nearest = nearest.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kk, x.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(kk);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      counts(assign[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);  // empty clusters keep their center
    }
  }
  return centers;
}

// Fraction of the bag's instances whose nearest word is each vocabulary entry.
inline Eigen::VectorXd word_histogram(const Eigen::MatrixXd& x, const Eigen::MatrixXd& vocabulary) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(vocabulary.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    (vocabulary.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
    h(best) += 1.0;
  }
  return h / static_cast<double>(x.rows());
}

// ---------------------------------------------------------------------------
// The classifier: a bag embedding followed by logistic regression.

class BagVectorClassifier final : public BagScorer {
 public:
  enum class Kind { statistics, words, miles, dissimilarity };

  struct Config {
    Kind kind = Kind::statistics;
    hyper::BagStat stat = hyper::BagStat::mean;
    int vocabulary = 10;
    double sigma2_per_dim = 1.0;
    hyper::Aggregation aggregation = hyper::Aggregation::mean_min;
  };

  static std::unique_ptr<BagVectorClassifier> train(std::span<const Bag> bags, const Config& cfg, std::uint64_t seed) {
    auto p = detail::prepare(bags);
    auto m = std::make_unique<BagVectorClassifier>();
    m->cfg_ = cfg;
    m->scaler_ = p.scaler;
    LogisticOptions lopt;
    switch (cfg.kind) {
      case Kind::statistics: break;
      case Kind::words: m->reference_ = kmeans(p.stacked, cfg.vocabulary, seed); break;
      case Kind::miles:
        m->reference_ = p.stacked;
        m->sigma2_ = cfg.sigma2_per_dim * static_cast<double>(p.dim());
        lopt.l1 = 0.01;
        lopt.l2 = 0.0;
        break;
      case Kind::dissimilarity: m->training_bags_ = p.bags; break;
    }
    Eigen::MatrixXd features;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Eigen::VectorXd v = m->embed(p.bags[i]);
      if (i == 0) features.resize(static_cast<Eigen::Index>(p.size()), v.size());
      features.row(static_cast<Eigen::Index>(i)) = v.transpose();
    }
    m->model_ = LogisticRegression::fit(features, p.labels, lopt);
    return m;
  }

  double score(const Eigen::MatrixXd& x) const override { return model_.decision(embed(scaler_.transform(x))); }

  // Bag vector of a standardized, canonical bag.
  Eigen::VectorXd embed(const Eigen::MatrixXd& z) const {
    switch (cfg_.kind) {
      case Kind::statistics: return bag_statistics(z, cfg_.stat);
      case Kind::words: return word_histogram(z, reference_);
      case Kind::miles: return miles_embedding(z, reference_, sigma2_);
      case Kind::dissimilarity: {
        Eigen::VectorXd v(static_cast<Eigen::Index>(training_bags_.size()));
        for (std::size_t k = 0; k < training_bags_.size(); ++k) {
          v(static_cast<Eigen::Index>(k)) = bag_dissimilarity(z, training_bags_[k], cfg_.aggregation);
        }
        return v;
      }
    }
    return {};
  }

 private:
  Config cfg_;
  Standardizer scaler_;
  Eigen::MatrixXd reference_;  // vocabulary or MILES prototypes
  double sigma2_ = 1.0;
  std::vector<Eigen::MatrixXd> training_bags_;
  LogisticRegression model_;
};

}  // namespace milchar::classifiers
