#pragma once

// Shared helpers for the test suites: brute-force oracles, random input
// generators and scratch directories.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "milchar/data.hpp"
#include "milchar/rng.hpp"
#include "milchar/roc.hpp"

namespace testing_support {

// Mann-Whitney statistic: fraction of (positive, negative) pairs ranked
// correctly, ties counted one half.
inline double concordant_pairs_auc(std::span<const double> scores, std::span<const int> labels) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) good += 1.0;
      else if (scores[i] == scores[j]) good += 0.5;
    }
  }
  return good / pairs;
}

struct ScoredLabels {
  std::vector<double> scores;
  std::vector<int> labels;
};

// 2..max_n samples with both classes present; scores drawn from a small grid
// so ties are common.
inline ScoredLabels random_scored_labels(milchar::CounterRng& rng, int max_n, int levels = 6) {
  ScoredLabels out;
  const auto n = static_cast<std::size_t>(rng.uniform_int(2, max_n));
  out.labels.resize(n);
  for (auto& l : out.labels) l = static_cast<int>(rng.uniform_int(0, 1));
  out.labels[0] = 1;
  out.labels[1] = 0;
  for (std::size_t i = 0; i < n; ++i) out.scores.push_back(static_cast<double>(rng.uniform_int(0, levels - 1)) / levels);
  return out;
}

inline milchar::RocCurve random_curve(milchar::CounterRng& rng, int max_n = 12) {
  const auto s = random_scored_labels(rng, max_n, 5);
  return milchar::roc_curve(s.scores, s.labels);
}

// Exact point on the piecewise-linear curve (right-continuous at vertical
// steps does not matter for integrals).
inline double tpr_at(const milchar::RocCurve& c, double x) {
  const auto& p = c.points();
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (x <= p[i].fpr && p[i].fpr > p[i - 1].fpr) {
      const double t = (x - p[i - 1].fpr) / (p[i].fpr - p[i - 1].fpr);
      return p[i - 1].tpr + t * (p[i].tpr - p[i - 1].tpr);
    }
  }
  return p.back().tpr;
}

// Midpoint-rule integral of |a - b|. The default grid is a multiple of
// lcm(1..12), so breakpoints of curves with at most 12 negatives fall on cell
// edges and only sign changes leave an O(h^2) error.
inline double numeric_area_between(const milchar::RocCurve& a, const milchar::RocCurve& b, int steps = 27720 * 8) {
  double s = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double x = (k + 0.5) / steps;
    s += std::abs(tpr_at(a, x) - tpr_at(b, x));
  }
  return s / steps;
}

inline Eigen::MatrixXd random_points(milchar::CounterRng& rng, Eigen::Index n, Eigen::Index dim, double spread = 3.0) {
  Eigen::MatrixXd p(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) p(i, k) = rng.uniform(-spread, spread);
  }
  return p;
}

inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& p) {
  Eigen::MatrixXd d(p.rows(), p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.rows(); ++j) d(i, j) = (p.row(i) - p.row(j)).norm();
  }
  return d;
}

inline milchar::Bag make_bag(const std::string& id, std::initializer_list<std::initializer_list<double>> rows,
                             milchar::BagLabel label) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) x(r, c++) = v;
    ++r;
  }
  return milchar::Bag(id, std::move(x), label);
}

// A fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("milchar-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
