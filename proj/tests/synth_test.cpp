#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "milchar/data.hpp"
#include "milchar/synth.hpp"
#include "support.hpp"

using namespace milchar;

namespace {

struct Pools {
  std::vector<Eigen::Vector2d> pos;
  std::vector<Eigen::Vector2d> neg;
};

Pools pools(const MilDataset& ds) {
  Pools p;
  for (const auto& b : ds.bags()) {
    for (Eigen::Index i = 0; i < b.instances().rows(); ++i) {
      (b.positive() ? p.pos : p.neg).push_back(b.instances().row(i).transpose());
    }
  }
  return p;
}

Eigen::Vector2d mean(const std::vector<Eigen::Vector2d>& v) {
  Eigen::Vector2d m = Eigen::Vector2d::Zero();
  for (const auto& x : v) m += x;
  return m / static_cast<double>(v.size());
}

Eigen::Matrix2d covariance(const std::vector<Eigen::Vector2d>& v) {
  const Eigen::Vector2d m = mean(v);
  Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
  for (const auto& x : v) c += (x - m) * (x - m).transpose();
  return c / static_cast<double>(v.size() - 1);
}

void expect_shape(const MilDataset& ds, std::size_t pos, std::size_t neg, std::size_t lo, std::size_t hi) {
  const auto m = meta_vector(ds);
  EXPECT_EQ(m.n_pos_bags, pos);
  EXPECT_EQ(m.n_neg_bags, neg);
  EXPECT_EQ(m.n_features, 2u);
  EXPECT_GE(m.min_bag_size, lo);
  EXPECT_LE(m.max_bag_size, hi);
}

GenSpec big(GenKind kind, std::size_t bags) {
  auto s = default_spec(kind, 3);
  s.n_pos = bags;
  s.n_neg = bags;
  return s;
}

}  // namespace

TEST(GenDefaults, BagCountsAndSizeRanges) {
  expect_shape(gen_gaussian(default_spec(GenKind::gaussian, 1)), 50, 50, 5, 9);
  expect_shape(gen_maron(default_spec(GenKind::maron, 1)), 50, 50, 10, 10);
  expect_shape(gen_concept(default_spec(GenKind::mi_concept, 1)), 10, 10, 5, 8);
  expect_shape(gen_difficult(default_spec(GenKind::difficult, 1)), 10, 40, 5, 9);
  expect_shape(gen_rotated(default_spec(GenKind::rotated, 1)), 30, 30, 15, 29);
  expect_shape(gen_widened(default_spec(GenKind::widened, 1)), 30, 30, 15, 29);
}

TEST(GenDefaults, MaronHasExactlyThousandInstances) {
  const auto m = meta_vector(gen_maron(default_spec(GenKind::maron, 1)));
  EXPECT_EQ(m.min_bag_size, 10u);
  EXPECT_EQ(m.max_bag_size, 10u);
  EXPECT_EQ(m.n_total_instances, 1000u);
}

TEST(GenDeterminism, SameSpecGivesBitIdenticalData) {
  for (auto kind : kAllGenKinds) {
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
      const auto s = default_spec(kind, seed);
      EXPECT_TRUE(generate(s) == generate(s)) << kind_name(kind);
    }
    EXPECT_FALSE(generate(default_spec(kind, 1)) == generate(default_spec(kind, 2))) << kind_name(kind);
  }
}

TEST(GenDeterminism, BagContentIndependentOfBagCount) {
  // Streams are keyed per bag, so adding bags leaves earlier bags unchanged.
  auto s = default_spec(GenKind::gaussian, 5);
  const auto small = generate(s);
  s.n_pos += 7;
  const auto large = generate(s);
  for (std::size_t b = 0; b < 50; ++b) EXPECT_TRUE(small.bags()[b] == large.bags()[b]);
}

TEST(GenGaussian, ConceptInstancesCenterOnPlantedMean) {
  const auto r = gen_gaussian_full(default_spec(GenKind::gaussian, 1));
  std::vector<Eigen::Vector2d> planted;
  for (std::size_t b = 0; b < r.dataset.size(); ++b) {
    const auto& bag = r.dataset.bags()[b];
    std::size_t count = 0;
    for (std::size_t i = 0; i < bag.size(); ++i) {
      if (!r.planted[b][i]) continue;
      planted.push_back(bag.instances().row(static_cast<Eigen::Index>(i)).transpose());
      ++count;
    }
    if (bag.positive()) {
      EXPECT_GE(count, 1u);
      EXPECT_LE(count, (bag.size() + 1) / 2);
    } else {
      EXPECT_EQ(count, 0u);
    }
  }
  const Eigen::Vector2d m = mean(planted);
  EXPECT_LT((m - Eigen::Vector2d(7.0, 1.0)).norm(), 0.5);
  // Frozen from the seed-1 run.
  EXPECT_EQ(planted.size(), 118u);
  EXPECT_NEAR(m.x(), 7.072531, 1e-6);
  EXPECT_NEAR(m.y(), 1.056241, 1e-6);
}

TEST(GenMaron, SupportAndPlantedConcept) {
  const auto ds = gen_maron(default_spec(GenKind::maron, 1));
  for (const auto& b : ds.bags()) {
    const auto& x = b.instances();
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_LE(x.maxCoeff(), 100.0);
    if (!b.positive()) continue;
    bool inside = false;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      inside |= x(i, 0) >= 47.5 && x(i, 0) <= 52.5 && x(i, 1) >= 47.5 && x(i, 1) <= 52.5;
    }
    EXPECT_TRUE(inside) << b.id();
  }
}

TEST(GenConcept, BackgroundInstancesSitNearTheirCenters) {
  const auto r = gen_concept_full(default_spec(GenKind::mi_concept, 1));
  const std::array<Eigen::Vector2d, 3> centers = {Eigen::Vector2d(2, -2), Eigen::Vector2d(-2, 2),
                                                  Eigen::Vector2d(-2, -2)};
  int total = 0;
  int close = 0;
  for (std::size_t b = 0; b < r.dataset.size(); ++b) {
    const auto& bag = r.dataset.bags()[b];
    int planted = 0;
    for (std::size_t i = 0; i < bag.size(); ++i) {
      const Eigen::Vector2d x = bag.instances().row(static_cast<Eigen::Index>(i)).transpose();
      if (r.planted[b][i]) {
        ++planted;
        continue;
      }
      double best = 1e300;
      for (const auto& c : centers) best = std::min(best, (x - c).norm());
      ++total;
      close += best < 3.0;
    }
    EXPECT_EQ(planted, bag.positive() ? 1 : 0);
  }
  EXPECT_GT(static_cast<double>(close) / total, 0.9);
}

TEST(GenConcept, BackgroundMixtureIsUniform) {
  const auto r = gen_concept_full(big(GenKind::mi_concept, 600));
  std::array<int, 3> hits{};
  int n = 0;
  for (std::size_t b = 0; b < r.dataset.size(); ++b) {
    const auto& x = r.dataset.bags()[b].instances();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (r.planted[b][static_cast<std::size_t>(i)]) continue;
      ++n;
      if (x(i, 0) > 0) ++hits[0];
      else if (x(i, 1) > 0) ++hits[1];
      else ++hits[2];
    }
  }
  // Quadrant assignment misclassifies a small known share, equal across
  // centers by symmetry.
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / n, 1.0 / 3.0, 0.03);
}

TEST(GenDifficult, ShiftOnlyTouchesFirstFeature) {
  const auto p = pools(gen_difficult(default_spec(GenKind::difficult, 1)));
  EXPECT_LT(std::abs(mean(p.pos).y() - mean(p.neg).y()), 0.5);
  const auto q = pools(gen_difficult(big(GenKind::difficult, 400)));
  EXPECT_NEAR(mean(q.pos).x() - mean(q.neg).x(), 2.0, 0.15);
  EXPECT_NEAR(mean(q.pos).y() - mean(q.neg).y(), 0.0, 0.05);
  // Bounds are about four standard errors of a variance over ~2800 draws.
  const auto c = covariance(q.neg);
  EXPECT_NEAR(c(0, 0), 9.0, 1.0);
  EXPECT_NEAR(c(1, 1), 1.0, 0.11);
}

TEST(GenRotated, ZeroAngleGivesSameDistribution) {
  auto s = big(GenKind::rotated, 300);
  s.params["angle_deg"] = 0.0;
  const auto p = pools(gen_rotated(s));
  const auto cp = covariance(p.pos);
  const auto cn = covariance(p.neg);
  // Roughly four standard errors at ~6600 draws per class.
  EXPECT_LT((cp - cn).norm(), 0.9);
  EXPECT_NEAR(cp(0, 1), 0.0, 0.15);
  EXPECT_LT((mean(p.pos) - mean(p.neg)).norm(), 0.25);
}

TEST(GenRotated, DefaultAngleTiltsLongAxis) {
  const auto p = pools(gen_rotated(big(GenKind::rotated, 300)));
  const auto c = covariance(p.pos);
  // Rotating diag(9,1) by 10 degrees gives off-diagonal 8 sin cos.
  const double t = 10.0 * std::numbers::pi / 180.0;
  EXPECT_NEAR(c(0, 1), 8.0 * std::sin(t) * std::cos(t), 0.15);
  EXPECT_NEAR(covariance(p.neg)(0, 1), 0.0, 0.15);
}

TEST(GenWidened, PositiveVarianceLarger) {
  const auto p = pools(gen_widened(default_spec(GenKind::widened, 1)));
  const auto cp = covariance(p.pos);
  const auto cn = covariance(p.neg);
  EXPECT_GT(cp(0, 0), cn(0, 0));
  EXPECT_GT(cp(1, 1), cn(1, 1));
}

TEST(GenWidened, UnitFactorGivesSameDistribution) {
  auto s = big(GenKind::widened, 300);
  s.params["widen"] = 1.0;
  const auto p = pools(gen_widened(s));
  EXPECT_LT((covariance(p.pos) - covariance(p.neg)).norm(), 0.1);
  EXPECT_LT((mean(p.pos) - mean(p.neg)).norm(), 0.06);
}

TEST(GenSpecText, RoundTrip) {
  for (auto kind : kAllGenKinds) {
    auto s = default_spec(kind, 18446744073709551615ULL);
    s.n_pos = 3;
    const auto back = parse_gen_spec(format_gen_spec(s));
    EXPECT_TRUE(back == s) << kind_name(kind);
  }
  const auto s = parse_gen_spec("# comment\nkind=widened\nn_pos=4\nn_neg=5\nbag_size_min=2\nbag_size_max=3\nseed=9\nparam.widen=2.5\n");
  EXPECT_EQ(s.kind, GenKind::widened);
  EXPECT_EQ(s.param("widen"), 2.5);
}

TEST(GenSpecText, RejectsBadSpecs) {
  const std::string base = "kind=gaussian\nn_pos=4\nn_neg=5\nbag_size_min=2\nbag_size_max=3\nseed=9\n";
  EXPECT_THROW(parse_gen_spec("kind=nope\n"), DataError);
  EXPECT_THROW(parse_gen_spec(base + "param.widen=2\n"), DataError);
  EXPECT_THROW(parse_gen_spec(base + "seed=1\n"), DataError);
  EXPECT_THROW(parse_gen_spec(base + "junk\n"), DataError);
  EXPECT_THROW(parse_gen_spec("kind=gaussian\nn_pos=0\nn_neg=5\nbag_size_min=2\nbag_size_max=3\nseed=9\n"), DataError);
  EXPECT_THROW(parse_gen_spec("kind=gaussian\nn_pos=1\nn_neg=5\nbag_size_min=4\nbag_size_max=3\nseed=9\n"), DataError);
  EXPECT_THROW(parse_gen_spec("kind=gaussian\nn_pos=-1\nn_neg=5\nbag_size_min=2\nbag_size_max=3\nseed=9\n"), DataError);
}

TEST(GenValidation, InvalidSpecsThrowUsageError) {
  auto s = default_spec(GenKind::gaussian, 1);
  s.bag_size_min = 0;
  EXPECT_THROW(generate(s), UsageError);
  s = default_spec(GenKind::maron, 1);
  s.bag_size_min = 1;
  EXPECT_THROW(generate(s), UsageError);
  s = default_spec(GenKind::widened, 1);
  s.params["widen"] = -1.0;
  EXPECT_THROW(generate(s), UsageError);
  s = default_spec(GenKind::gaussian, 1);
  EXPECT_THROW(gen_maron(s), UsageError);
}

TEST(GenProperties, RandomSpecsRespectContract) {
  CounterRng rng(44);
  for (int t = 0; t < 60; ++t) {
    const auto kind = kAllGenKinds[rng.uniform_int(0, 5)];
    auto s = default_spec(kind, rng());
    s.n_pos = rng.uniform_int(1, 8);
    s.n_neg = rng.uniform_int(1, 8);
    s.bag_size_min = rng.uniform_int(2, 6);
    s.bag_size_max = s.bag_size_min + rng.uniform_int(0, 6);
    const auto r = generate_full(s);
    const auto m = meta_vector(r.dataset);
    EXPECT_EQ(m.n_pos_bags, s.n_pos);
    EXPECT_EQ(m.n_neg_bags, s.n_neg);
    EXPECT_GE(m.min_bag_size, s.bag_size_min);
    EXPECT_LE(m.max_bag_size, s.bag_size_max);
    ASSERT_EQ(r.planted.size(), r.dataset.size());
    for (std::size_t b = 0; b < r.dataset.size(); ++b) EXPECT_EQ(r.planted[b].size(), r.dataset.bags()[b].size());
  }
}
