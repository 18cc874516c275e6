#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "milchar/classifiers/common.hpp"

namespace milchar::classifiers {

// Minimal Hausdorff distance: the larger of the two directed minimum
// distances, which both equal the closest pair distance.
inline double minimal_hausdorff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    best = std::min(best, (b.rowwise() - a.row(i)).rowwise().squaredNorm().minCoeff());
  }
  return std::sqrt(best);
}

// Lazy nearest-neighbour bag classifier. A test bag collects its R nearest
// training bags (references) and every training bag that would rank it among
// its own C nearest neighbours (citers). Ties in rank go to the lower bag
// index; the test bag counts as the last index.
class CitationKnn final : public BagScorer {
 public:
  static std::unique_ptr<CitationKnn> train(std::span<const Bag> bags, int references, int citers) {
    auto p = detail::prepare(bags);
    auto m = std::make_unique<CitationKnn>();
    m->references_ = references;
    m->citers_ = citers;
    m->scaler_ = p.scaler;
    m->labels_ = p.labels;
    const std::size_t n = p.size();
    m->dist_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = minimal_hausdorff(p.bags[i], p.bags[j]);
        m->dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        m->dist_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    }
    m->bags_ = std::move(p.bags);
    return m;
  }

  double score(const Eigen::MatrixXd& x) const override {
    const Eigen::MatrixXd z = scaler_.transform(x);
    const std::size_t n = bags_.size();
    std::vector<double> to_test(n);
    for (std::size_t i = 0; i < n; ++i) to_test[i] = minimal_hausdorff(z, bags_[i]);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return to_test[a] < to_test[b]; });
    const auto r = std::min(static_cast<std::size_t>(references_), n);
    int positive = 0;
    for (std::size_t k = 0; k < r; ++k) positive += labels_[order[k]];

    int n_citers = 0;
    for (std::size_t b = 0; b < n; ++b) {
      // Rank of the test bag among b's neighbours: training bags that are at
      // least as close to b come first.
      std::size_t rank = 0;
      for (std::size_t o = 0; o < n && rank < static_cast<std::size_t>(citers_); ++o) {
        if (o != b && dist_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(o)) <= to_test[b]) ++rank;
      }
      if (rank < static_cast<std::size_t>(citers_)) {
        ++n_citers;
        positive += labels_[b];
      }
    }
    return static_cast<double>(positive) / static_cast<double>(r + static_cast<std::size_t>(n_citers));
  }

 private:
  int references_ = 3;
  int citers_ = 5;
  Standardizer scaler_;
  std::vector<Eigen::MatrixXd> bags_;
  std::vector<int> labels_;
  Eigen::MatrixXd dist_;
};

}  // namespace milchar::classifiers
