#pragma once

// The classifier zoo: catalog, training and bag scoring.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "milchar/classifiers/bag_vectors.hpp"
#include "milchar/classifiers/citation_knn.hpp"
#include "milchar/classifiers/common.hpp"
#include "milchar/classifiers/diverse_density.hpp"
#include "milchar/classifiers/mil_kernel.hpp"
#include "milchar/classifiers/milboost.hpp"
#include "milchar/classifiers/misvm.hpp"
#include "milchar/classifiers/simple_mil.hpp"
#include "milchar/data.hpp"

namespace milchar {

// Immutable fitted classifier; cheap to copy and safe to share.
class TrainedModel {
 public:
  TrainedModel(ClassifierSpec spec, std::size_t feature_dim, std::shared_ptr<const BagScorer> impl)
      : spec_(std::move(spec)), feature_dim_(feature_dim), impl_(std::move(impl)) {}

  const ClassifierSpec& spec() const noexcept { return spec_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  // Higher means more positive.
  double score(const Bag& bag) const {
    if (bag.dim() != feature_dim_) {
      throw DataError("bag '" + bag.id() + "' has dimension " + std::to_string(bag.dim()) + ", model expects " +
                      std::to_string(feature_dim_));
    }
    const double s = impl_->score(detail::canonical_rows(bag.instances()));
    if (!std::isfinite(s)) {
      throw NumericalError(spec_.display_name + " produced a non-finite score for bag '" + bag.id() + "'");
    }
    return s;
  }

  std::optional<Eigen::VectorXd> concept_location() const { return impl_->concept_location(); }

  const BagScorer& scorer() const noexcept { return *impl_; }

 private:
  ClassifierSpec spec_;
  std::size_t feature_dim_;
  std::shared_ptr<const BagScorer> impl_;
};

inline TrainedModel train(const ClassifierSpec& spec, std::span<const Bag> bags, std::uint64_t seed) {
  if (bags.empty()) throw DataError("empty training set");
  const std::size_t dim = bags.front().dim();
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& b : bags) {
    if (b.dim() != dim) throw DataError("training bags disagree on feature dimension");
    (b.positive() ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw DataError("single-class training set");

  using namespace classifiers;
  const auto v = static_cast<std::size_t>(spec.variant_id);
  const std::uint64_t key = derive_key(seed, spec.display_name);
  std::shared_ptr<const BagScorer> impl;
  switch (spec.family) {
    case ClassifierFamily::simple_mil: impl = SimpleMil::train(bags); break;
    case ClassifierFamily::diverse_density: impl = DiverseDensity::train(bags, key); break;
    case ClassifierFamily::emdd: impl = Emdd::train(bags, key); break;
    case ClassifierFamily::milboost: impl = MilBoost::train(bags); break;
    case ClassifierFamily::citation_knn:
      impl = CitationKnn::train(bags, hyper::kCitationRC.at(v).first, hyper::kCitationRC.at(v).second);
      break;
    case ClassifierFamily::misvm: impl = MiSvm::train(bags, hyper::kMisvmC.at(v), key); break;
    case ClassifierFamily::miles: {
      BagVectorClassifier::Config cfg;
      cfg.kind = BagVectorClassifier::Kind::miles;
      cfg.sigma2_per_dim = hyper::kMilesSigma2PerDim.at(v);
      impl = BagVectorClassifier::train(bags, cfg, key);
      break;
    }
    case ClassifierFamily::mil_kernel: impl = MilKernel::train(bags, hyper::kKernelGammaTimesDim.at(v)); break;
    case ClassifierFamily::bag_statistics: {
      BagVectorClassifier::Config cfg;
      cfg.kind = BagVectorClassifier::Kind::statistics;
      cfg.stat = hyper::kBagStats.at(v);
      impl = BagVectorClassifier::train(bags, cfg, key);
      break;
    }
    case ClassifierFamily::bag_of_words: {
      BagVectorClassifier::Config cfg;
      cfg.kind = BagVectorClassifier::Kind::words;
      cfg.vocabulary = hyper::kVocabularySize.at(v);
      impl = BagVectorClassifier::train(bags, cfg, key);
      break;
    }
    case ClassifierFamily::bag_dissimilarity: {
      BagVectorClassifier::Config cfg;
      cfg.kind = BagVectorClassifier::Kind::dissimilarity;
      cfg.aggregation = hyper::kAggregations.at(v);
      impl = BagVectorClassifier::train(bags, cfg, key);
      break;
    }
  }
  return TrainedModel(spec, dim, std::move(impl));
}

inline TrainedModel train(const ClassifierSpec& spec, const MilDataset& ds, std::uint64_t seed) {
  return train(spec, std::span<const Bag>(ds.bags()), seed);
}

inline std::vector<double> score_bags(const TrainedModel& model, std::span<const Bag> bags) {
  std::vector<double> out;
  out.reserve(bags.size());
  for (const auto& b : bags) out.push_back(model.score(b));
  return out;
}

}  // namespace milchar
