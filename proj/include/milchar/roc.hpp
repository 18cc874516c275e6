#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "milchar/error.hpp"

namespace milchar {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// Piecewise-linear ROC curve from (0,0) to (1,1) with non-decreasing fpr and
// tpr. Several points may share an fpr (vertical steps).
class RocCurve {
 public:
  RocCurve() : points_{{0.0, 0.0}, {1.0, 1.0}} {}

  explicit RocCurve(std::vector<RocPoint> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw DataError("ROC curve needs at least two points");
    if (points_.front() != RocPoint{0.0, 0.0}) throw DataError("ROC curve must start at (0,0)");
    if (points_.back() != RocPoint{1.0, 1.0}) throw DataError("ROC curve must end at (1,1)");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      if (!(p.fpr >= 0.0 && p.fpr <= 1.0 && p.tpr >= 0.0 && p.tpr <= 1.0)) {
        throw DataError("ROC point outside the unit square");
      }
      if (i > 0 && (p.fpr < points_[i - 1].fpr || p.tpr < points_[i - 1].tpr)) {
        throw DataError("ROC curve must be non-decreasing in fpr and tpr");
      }
    }
  }

  const std::vector<RocPoint>& points() const noexcept { return points_; }

  friend bool operator==(const RocCurve&, const RocCurve&) = default;

 private:
  std::vector<RocPoint> points_;
};

// Threshold sweep over the scores in descending order. Each group of tied
// scores contributes one step, so ties give diagonal segments.
inline RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw UsageError("roc_curve: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DataError("roc_curve: non-finite score");
    if (labels[i] != 0 && labels[i] != 1) throw DataError("roc_curve: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("roc_curve: need both positive and negative labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> pts{{0.0, 0.0}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    for (; k < order.size() && scores[order[k]] == s; ++k) (labels[order[k]] ? tp : fp) += 1;
    pts.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                   static_cast<double>(tp) / static_cast<double>(n_pos)});
  }
  return RocCurve(std::move(pts));
}

// Trapezoidal area under the curve.
inline double auc(const RocCurve& curve) {
  const auto& p = curve.points();
  double a = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) a += (p[i].fpr - p[i - 1].fpr) * (p[i].tpr + p[i - 1].tpr) * 0.5;
  return a;
}

namespace detail {

// The linear piece of `curve` over the open fpr interval (x0, x1), which must
// lie between two consecutive distinct fpr breakpoints. Returns the tpr values
// at x0 and x1 on that piece.
class CurveWalker {
 public:
  explicit CurveWalker(const RocCurve& c) : p_(c.points()) {}

  std::pair<double, double> values(double x0, double x1) {
    while (i_ + 1 < p_.size() && !(p_[i_].fpr <= x0 && p_[i_ + 1].fpr >= x1 && p_[i_].fpr < p_[i_ + 1].fpr)) ++i_;
    const auto& a = p_[i_];
    const auto& b = p_[i_ + 1];
    const double w = b.fpr - a.fpr;
    auto at = [&](double x) { return a.tpr + (b.tpr - a.tpr) * ((x - a.fpr) / w); };
    return {x0 == a.fpr ? a.tpr : at(x0), x1 == b.fpr ? b.tpr : at(x1)};
  }

 private:
  const std::vector<RocPoint>& p_;
  std::size_t i_ = 0;
};

}  // namespace detail

// Integral over fpr in [0,1] of |tpr_a - tpr_b|, exact for piecewise-linear
// curves: pieces are split at the union of both breakpoint sets and at sign
// changes of the difference.
inline double roc_area_between(const RocCurve& a, const RocCurve& b) {
  std::vector<double> xs;
  for (const auto& p : a.points()) xs.push_back(p.fpr);
  for (const auto& p : b.points()) xs.push_back(p.fpr);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  detail::CurveWalker wa(a);
  detail::CurveWalker wb(b);
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double x0 = xs[k];
    const double x1 = xs[k + 1];
    const auto [a0, a1] = wa.values(x0, x1);
    const auto [b0, b1] = wb.values(x0, x1);
    const double d0 = a0 - b0;
    const double d1 = a1 - b1;
    const double w = x1 - x0;
    if ((d0 >= 0.0 && d1 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0)) {
      area += 0.5 * w * (std::abs(d0) + std::abs(d1));
    } else {
      // Two triangles meeting at the crossing point.
      area += 0.5 * w * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1));
    }
  }
  return area;
}

}  // namespace milchar
