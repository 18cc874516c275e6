#pragma once

#include <memory>
#include <span>
#include <vector>

#include "milchar/classifiers/common.hpp"
#include "milchar/logistic.hpp"

namespace milchar::classifiers {

// Every instance inherits its bag's label; the bag score is the mean instance
// posterior of a logistic classifier.
class SimpleMil final : public BagScorer {
 public:
  static std::unique_ptr<SimpleMil> train(std::span<const Bag> bags) {
    auto p = detail::prepare(bags);
    std::vector<int> y;
    y.reserve(static_cast<std::size_t>(p.stacked.rows()));
    for (std::size_t i = 0; i < p.size(); ++i) y.insert(y.end(), static_cast<std::size_t>(p.bags[i].rows()), p.labels[i]);
    auto m = std::make_unique<SimpleMil>();
    m->scaler_ = p.scaler;
    m->model_ = LogisticRegression::fit(p.stacked, y);
    return m;
  }

  double score(const Eigen::MatrixXd& x) const override {
    const Eigen::VectorXd d = model_.decision(scaler_.transform(x));
    std::vector<double> post(static_cast<std::size_t>(d.size()));
    for (Eigen::Index i = 0; i < d.size(); ++i) post[static_cast<std::size_t>(i)] = sigmoid(d(i));
    return detail::ordered_sum(std::move(post)) / static_cast<double>(d.size());
  }

 private:
  Standardizer scaler_;
  LogisticRegression model_;
};

}  // namespace milchar::classifiers
