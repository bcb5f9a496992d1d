#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "lttrack/assoc.hpp"
#include "lttrack/motion.hpp"
#include "oracles.hpp"

using namespace lttrack;

TEST(Iou, Examples) {
  const BBox a{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(assoc::iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(assoc::iou(a, BBox{20, 20, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(assoc::iou(a, BBox{10, 0, 10, 10}), 0.0);  // touching edge
  EXPECT_NEAR(assoc::iou(a, BBox{5, 0, 10, 10}), 50.0 / 150.0, 1e-15);
}

TEST(Iou, SymmetricOnRandomBoxes) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> pos(0, 50), size(1, 30);
  for (int i = 0; i < 1000; ++i) {
    const BBox a{pos(gen), pos(gen), size(gen), size(gen)};
    const BBox b{pos(gen), pos(gen), size(gen), size(gen)};
    const double ab = assoc::iou(a, b);
    EXPECT_DOUBLE_EQ(ab, assoc::iou(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(Hungarian, SmallExamples) {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  const auto pairs = assoc::hungarian(eye);
  ASSERT_EQ(pairs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(pairs[i], (assoc::IndexPair{i, i}));

  Eigen::MatrixXd one(1, 1);
  one << 7.5;
  EXPECT_EQ(assoc::hungarian(one), (std::vector<assoc::IndexPair>{{0, 0}}));
  EXPECT_TRUE(assoc::hungarian(Eigen::MatrixXd(0, 0)).empty());
  EXPECT_TRUE(assoc::hungarian(Eigen::MatrixXd(0, 3)).empty());
}

TEST(Hungarian, MatchesBruteForceOnRandomMatrices) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> dim(1, 6), value(0, 30);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = dim(gen);
    const int cols = dim(gen);
    Eigen::MatrixXd cost(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) cost(r, c) = value(gen);
    }
    const auto pairs = assoc::hungarian(cost);
    ASSERT_EQ(pairs.size(), static_cast<std::size_t>(std::min(rows, cols)));
    std::set<std::size_t> used_rows, used_cols;
    for (const auto& [r, c] : pairs) {
      EXPECT_TRUE(used_rows.insert(r).second);
      EXPECT_TRUE(used_cols.insert(c).second);
    }
    EXPECT_EQ(assoc::assignment_cost(cost, pairs), oracle::brute_force_min_cost(cost));
  }
}

TEST(Hungarian, RejectsNonFiniteCosts) {
  Eigen::MatrixXd cost(2, 2);
  cost << 1, std::numeric_limits<double>::infinity(), 0, 1;
  EXPECT_THROW(assoc::hungarian(cost), std::invalid_argument);
}

TEST(Associate, ThresholdDemotesWeakPairs) {
  // Shift so that IOU = 0.2: overlap 10 * w over union 2*100 - overlap.
  // 10 * w / (200 - 10 * w) = 0.2  =>  w = 10 / 3.
  const BBox pred{0, 0, 10, 10};
  const BBox det{10.0 - 10.0 / 3.0, 0, 10, 10};
  ASSERT_NEAR(assoc::iou(pred, det), 0.2, 1e-12);
  const std::vector<BBox> p{pred}, d{det};
  const auto a = assoc::associate(p, d, 0.25);
  EXPECT_TRUE(a.pairs.empty());
  EXPECT_EQ(a.unmatched_tracklets, (std::vector<std::size_t>{0}));
  EXPECT_EQ(a.unmatched_detections, (std::vector<std::size_t>{0}));

  const auto exact = assoc::associate(p, p, 0.25);
  EXPECT_EQ(exact.pairs, (std::vector<assoc::IndexPair>{{0, 0}}));
}

namespace {

// Exhaustive optimum of total IOU over injective matchings, then thresholded.
double best_thresholded_iou(const std::vector<BBox>& p, const std::vector<BBox>& d, double lambda,
                            std::size_t& kept) {
  std::vector<std::size_t> perm(std::max(p.size(), d.size()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  double best_kept_sum = 0.0;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (perm[i] < d.size()) total += assoc::iou(p[i], d[perm[i]]);
    }
    if (total > best + 1e-12) {
      best = total;
      best_kept_sum = 0.0;
      kept = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (perm[i] < d.size() && assoc::iou(p[i], d[perm[i]]) >= lambda) {
          best_kept_sum += assoc::iou(p[i], d[perm[i]]);
          ++kept;
        }
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best_kept_sum;
}

}  // namespace

TEST(Associate, MatchesExhaustiveSearchAfterThresholding) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> pos(0, 40), size(8, 20);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<BBox> p(3), d(2);
    for (auto& b : p) b = BBox{pos(gen), pos(gen), size(gen), size(gen)};
    for (auto& b : d) b = BBox{pos(gen), pos(gen), size(gen), size(gen)};
    const auto a = assoc::associate(p, d, 0.25);
    double sum = 0.0;
    for (const auto& [r, c] : a.pairs) {
      EXPECT_GE(assoc::iou(p[r], d[c]), 0.25);
      sum += assoc::iou(p[r], d[c]);
    }
    std::size_t kept = 0;
    const double expect = best_thresholded_iou(p, d, 0.25, kept);
    EXPECT_NEAR(sum, expect, 1e-9);
    EXPECT_EQ(a.pairs.size(), kept);
    EXPECT_EQ(a.pairs.size() + a.unmatched_tracklets.size(), p.size());
    EXPECT_EQ(a.pairs.size() + a.unmatched_detections.size(), d.size());
  }
}

// --- motion ----------------------------------------------------------------

TEST(Motion, StationaryHistoryPredictsLastBox) {
  const BBox box{100, 50, 20, 30};
  for (auto kind : {PredictorKind::Static, PredictorKind::ConstantVelocity, PredictorKind::KalmanCV}) {
    auto p = motion::Predictor::make(kind, box);
    for (int i = 0; i < 5; ++i) {
      p.advance();
      p.correct(box);
    }
    const BBox got = p.predict().box;
    EXPECT_NEAR(got.x, box.x, 1e-6);
    EXPECT_NEAR(got.y, box.y, 1e-6);
    EXPECT_NEAR(got.w, box.w, 1e-6);
    EXPECT_NEAR(got.h, box.h, 1e-6);
  }
}

TEST(Motion, ConstantVelocityExtrapolates) {
  auto p = motion::Predictor::make(PredictorKind::ConstantVelocity, BBox::from_center(0, 0, 10, 10));
  p.advance();
  p.correct(BBox::from_center(2, 0, 10, 10));
  const BBox next = p.predict().box;
  EXPECT_DOUBLE_EQ(next.cx(), 4.0);
  EXPECT_DOUBLE_EQ(next.cy(), 0.0);
  EXPECT_DOUBLE_EQ(next.w, 10.0);
}

TEST(Motion, StaticCorrectThenPredict) {
  auto p = motion::Predictor::make(PredictorKind::Static, BBox{0, 0, 5, 5});
  p.advance();
  p.correct(BBox{3, 4, 6, 7});
  EXPECT_EQ(p.predict().box, (BBox{3, 4, 6, 7}));
}

TEST(Motion, NoiselessKalmanExtrapolatesExactly) {
  motion::KalmanCvModel k(BBox::from_center(10, 20, 16, 16), KalmanNoise{0.0, 0.0});
  for (int t = 1; t <= 6; ++t) {
    k.advance();
    k.correct(BBox::from_center(10 + 3.0 * t, 20 - 1.5 * t, 16, 16));
  }
  const BBox next = k.predict().box;
  EXPECT_NEAR(next.cx(), 10 + 3.0 * 7, 1e-6);
  EXPECT_NEAR(next.cy(), 20 - 1.5 * 7, 1e-6);
  EXPECT_NEAR(next.w, 16.0, 1e-6);
  EXPECT_NEAR(next.h, 16.0, 1e-6);
}

TEST(Motion, KalmanCorrectionLandsBetweenPriorAndObservation) {
  motion::KalmanCvModel k(BBox::from_center(0, 0, 16, 16), KalmanNoise{});
  for (int t = 1; t <= 10; ++t) {
    k.advance();
    k.correct(BBox::from_center(0, 0, 16, 16));
  }
  k.advance();
  const double prior = k.state()(0);
  k.correct(BBox::from_center(10, 0, 16, 16));
  const double posterior = k.state()(0);
  EXPECT_GT(posterior, prior);
  EXPECT_LT(posterior, 10.0);
}

TEST(Motion, KalmanVelocityDecaysUnderRepeatedObservation) {
  motion::KalmanCvModel k(BBox::from_center(0, 0, 16, 16), KalmanNoise{});
  for (int t = 1; t <= 5; ++t) {
    k.advance();
    k.correct(BBox::from_center(5.0 * t, 0, 16, 16));
  }
  double speed = std::abs(k.state()(4));
  ASSERT_GT(speed, 1.0);
  for (int t = 0; t < 40; ++t) {
    k.advance();
    k.correct(BBox::from_center(25, 0, 16, 16));
    const double now = std::abs(k.state()(4));
    if (t > 5) {
      EXPECT_LE(now, speed + 1e-9);
    }
    speed = now;
  }
  EXPECT_LT(speed, 0.05);
}

TEST(Motion, CollapsedBoxIsClampedAndFlagged) {
  const auto p = motion::box_from_state(50, 50, 1e-6, 1.0);
  EXPECT_TRUE(p.clamped);
  EXPECT_GE(p.box.w, 1.0);
  EXPECT_GE(p.box.h, 1.0);
  EXPECT_TRUE(p.box.valid());
}

TEST(Motion, ShrinkingKalmanStaysValid) {
  motion::KalmanCvModel k(BBox::from_center(0, 0, 40, 40), KalmanNoise{});
  for (int t = 1; t <= 8; ++t) {
    k.advance();
    const double s = 40.0 - 4.5 * t;
    k.correct(BBox::from_center(0, 0, s, s));
  }
  for (int t = 0; t < 50; ++t) {
    EXPECT_TRUE(k.predict().box.valid());
    k.advance();
  }
}
