#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "milchar/data.hpp"
#include "milchar/error.hpp"
#include "milchar/linalg.hpp"
#include "milchar/text.hpp"

namespace milchar {

enum class ClassifierFamily {
  simple_mil,
  diverse_density,
  emdd,
  milboost,
  citation_knn,
  misvm,
  miles,
  mil_kernel,
  bag_statistics,
  bag_of_words,
  bag_dissimilarity,
};

inline std::string_view family_name(ClassifierFamily f) {
  switch (f) {
    case ClassifierFamily::simple_mil: return "SimpleMIL";
    case ClassifierFamily::diverse_density: return "DiverseDensity";
    case ClassifierFamily::emdd: return "EMDD";
    case ClassifierFamily::milboost: return "MILBoost";
    case ClassifierFamily::citation_knn: return "CitationKNN";
    case ClassifierFamily::misvm: return "MiSVM";
    case ClassifierFamily::miles: return "MILES";
    case ClassifierFamily::mil_kernel: return "MILKernel";
    case ClassifierFamily::bag_statistics: return "BagStatistics";
    case ClassifierFamily::bag_of_words: return "BagOfWords";
    case ClassifierFamily::bag_dissimilarity: return "BagDissimilarity";
  }
  return "?";
}

struct ClassifierSpec {
  ClassifierFamily family = ClassifierFamily::simple_mil;
  int variant_id = 0;
  std::string display_name;

  friend bool operator==(const ClassifierSpec&, const ClassifierSpec&) = default;
};

// Hyperparameters selected by variant_id.
namespace hyper {
inline constexpr std::array<std::pair<int, int>, 2> kCitationRC = {{{3, 5}, {5, 7}}};
inline constexpr std::array<double, 2> kMisvmC = {1.0, 100.0};
inline constexpr std::array<double, 2> kMilesSigma2PerDim = {1.0, 5.0};
inline constexpr std::array<double, 3> kKernelGammaTimesDim = {0.1, 1.0, 10.0};
inline constexpr std::array<int, 3> kVocabularySize = {10, 25, 50};
enum class BagStat { mean, min_max, mean_min_max };
inline constexpr std::array<BagStat, 3> kBagStats = {BagStat::mean, BagStat::min_max, BagStat::mean_min_max};
enum class Aggregation { mean_min, min_min, mean_mean };
inline constexpr std::array<Aggregation, 3> kAggregations = {Aggregation::mean_min, Aggregation::min_min,
                                                             Aggregation::mean_mean};
}  // namespace hyper

// The fixed zoo, in listing order: simpleMIL, diverse density, EM-DD,
// MILBoost, Citation-kNN x2, miSVM x2, MILES x2, MIL kernel x3,
// bag statistics x3, bag of words x3, bag dissimilarity x3.
inline const std::vector<ClassifierSpec>& catalog() {
  static const std::vector<ClassifierSpec> specs = {
      {ClassifierFamily::simple_mil, 0, "simpleMIL"},
      {ClassifierFamily::diverse_density, 0, "diverseDensity"},
      {ClassifierFamily::emdd, 0, "emdd"},
      {ClassifierFamily::milboost, 0, "milboost"},
      {ClassifierFamily::citation_knn, 0, "citationKNN-R3-C5"},
      {ClassifierFamily::citation_knn, 1, "citationKNN-R5-C7"},
      {ClassifierFamily::misvm, 0, "miSVM-C1"},
      {ClassifierFamily::misvm, 1, "miSVM-C100"},
      {ClassifierFamily::miles, 0, "miles-s1d"},
      {ClassifierFamily::miles, 1, "miles-s5d"},
      {ClassifierFamily::mil_kernel, 0, "milKernel-g0.1"},
      {ClassifierFamily::mil_kernel, 1, "milKernel-g1"},
      {ClassifierFamily::mil_kernel, 2, "milKernel-g10"},
      {ClassifierFamily::bag_statistics, 0, "bagStats-mean"},
      {ClassifierFamily::bag_statistics, 1, "bagStats-minmax"},
      {ClassifierFamily::bag_statistics, 2, "bagStats-meanminmax"},
      {ClassifierFamily::bag_of_words, 0, "bow-k10"},
      {ClassifierFamily::bag_of_words, 1, "bow-k25"},
      {ClassifierFamily::bag_of_words, 2, "bow-k50"},
      {ClassifierFamily::bag_dissimilarity, 0, "dissim-meanmin"},
      {ClassifierFamily::bag_dissimilarity, 1, "dissim-minmin"},
      {ClassifierFamily::bag_dissimilarity, 2, "dissim-meanmean"},
  };
  return specs;
}

inline std::optional<std::size_t> catalog_index(std::string_view display_name) {
  const auto& c = catalog();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].display_name == display_name) return i;
  }
  return std::nullopt;
}

inline const ClassifierSpec& find_classifier(std::string_view display_name) {
  auto i = catalog_index(display_name);
  if (!i) throw UsageError("unknown classifier '" + std::string(display_name) + "'");
  return catalog()[*i];
}

// Human-readable hyperparameters, used in the catalog manifest.
inline std::string describe_hyperparameters(const ClassifierSpec& s) {
  const auto v = static_cast<std::size_t>(s.variant_id);
  switch (s.family) {
    case ClassifierFamily::simple_mil: return "base=logistic combine=mean";
    case ClassifierFamily::diverse_density: return "restarts=10 scale0=0.1";
    case ClassifierFamily::emdd: return "restarts=10 scale0=0.1 max_em=20";
    case ClassifierFamily::milboost: return "rounds=100 weak=stump";
    case ClassifierFamily::citation_knn:
      return "R=" + std::to_string(hyper::kCitationRC[v].first) + " C=" + std::to_string(hyper::kCitationRC[v].second);
    case ClassifierFamily::misvm: return "C=" + text::format_double(hyper::kMisvmC[v]);
    case ClassifierFamily::miles: return "sigma2=" + text::format_double(hyper::kMilesSigma2PerDim[v]) + "*d l1=0.01";
    case ClassifierFamily::mil_kernel: return "gamma=" + text::format_double(hyper::kKernelGammaTimesDim[v]) + "/d";
    case ClassifierFamily::bag_statistics: {
      constexpr std::array<std::string_view, 3> names = {"mean", "min|max", "mean|min|max"};
      return "stats=" + std::string(names[v]);
    }
    case ClassifierFamily::bag_of_words: return "k=" + std::to_string(hyper::kVocabularySize[v]);
    case ClassifierFamily::bag_dissimilarity: {
      constexpr std::array<std::string_view, 3> names = {"mean-min", "min-min", "mean-mean"};
      return "aggregation=" + std::string(names[v]);
    }
  }
  return {};
}

// Tab-separated: index, display name, family, hyperparameters.
inline std::string catalog_manifest(std::span<const ClassifierSpec> specs) {
  std::string out = "index\tname\tfamily\thyperparameters\n";
  for (const auto& s : specs) {
    out += std::to_string(catalog_index(s.display_name).value_or(0)) + '\t' + s.display_name + '\t' +
           std::string(family_name(s.family)) + '\t' + describe_hyperparameters(s) + '\n';
  }
  return out;
}

// Noisy-or: 1 - prod(1 - p_j).
inline double noisy_or(std::span<const double> p) {
  double log_q = 0.0;
  for (double v : p) {
    if (v >= 1.0) return 1.0;
    log_q += std::log1p(-v);
  }
  return -std::expm1(log_q);
}

namespace detail {

// Rows sorted lexicographically. Scoring always works on this canonical form,
// which makes every score an exact set function of the bag.
inline Eigen::MatrixXd canonical_rows(const Eigen::MatrixXd& x) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (x(a, c) != x(b, c)) return x(a, c) < x(b, c);
    }
    return false;
  });
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (std::size_t i = 0; i < order.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(order[i]);
  return out;
}

// Sum in ascending order, so the result does not depend on input order.
inline double ordered_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Training bags after canonical ordering and standardization with statistics
// of all training instances.
struct PreparedBags {
  Standardizer scaler;
  std::vector<Eigen::MatrixXd> bags;
  std::vector<int> labels;  // 0/1
  Eigen::MatrixXd stacked;  // all instances, bag after bag
  std::vector<Eigen::Index> offsets;  // offsets[i] = first row of bag i; offsets.back() = total

  std::size_t size() const noexcept { return bags.size(); }
  Eigen::Index dim() const noexcept { return stacked.cols(); }
};

inline PreparedBags prepare(std::span<const Bag> bags) {
  PreparedBags p;
  Eigen::Index total = 0;
  for (const auto& b : bags) total += static_cast<Eigen::Index>(b.size());
  const auto d = static_cast<Eigen::Index>(bags.front().dim());
  Eigen::MatrixXd raw(total, d);
  std::vector<Eigen::MatrixXd> canon;
  canon.reserve(bags.size());
  p.offsets.push_back(0);
  for (const auto& b : bags) {
    canon.push_back(canonical_rows(b.instances()));
    raw.middleRows(p.offsets.back(), canon.back().rows()) = canon.back();
    p.offsets.push_back(p.offsets.back() + canon.back().rows());
    p.labels.push_back(b.positive() ? 1 : 0);
  }
  p.scaler = Standardizer::fit(raw);
  p.stacked = p.scaler.transform(raw);
  p.bags.reserve(bags.size());
  for (std::size_t i = 0; i < bags.size(); ++i) {
    p.bags.push_back(p.stacked.middleRows(p.offsets[i], p.offsets[i + 1] - p.offsets[i]));
  }
  return p;
}

inline int instance_bag_label(const PreparedBags& p, Eigen::Index row) {
  const auto it = std::upper_bound(p.offsets.begin(), p.offsets.end(), row);
  return p.labels[static_cast<std::size_t>(it - p.offsets.begin() - 1)];
}

}  // namespace detail

// Interface of a fitted classifier. `score` receives the canonical raw rows of
// a bag; implementations standardize with their own training statistics.
class BagScorer {
 public:
  virtual ~BagScorer() = default;
  virtual double score(const Eigen::MatrixXd& canonical_instances) const = 0;
  // Concept location in input units, for concept-based families.
  virtual std::optional<Eigen::VectorXd> concept_location() const { return std::nullopt; }
};

}  // namespace milchar
