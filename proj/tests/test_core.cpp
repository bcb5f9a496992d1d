#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lttrack/config.hpp"
#include "lttrack/quality.hpp"
#include "lttrack/tracklet.hpp"
#include "lttrack/types.hpp"

using namespace lttrack;

namespace {

Detection det_at(FrameIndex frame, std::int64_t id, BBox box = {10, 10, 20, 20}) {
  const std::vector<double> e{1.0, 0.0, 0.0};
  return Detection{frame, DetId{id}, box, Embedding(std::span<const double>(e)), QualityAttrs{}, std::nullopt};
}

}  // namespace

TEST(Embedding, NormalizedOnConstruction) {
  const std::vector<double> raw{3.0, 4.0};
  const Embedding e{std::span<const double>(raw)};
  EXPECT_NEAR(e.norm(), 1.0, 1e-6);
  EXPECT_NEAR(e.values()[0], 0.6, 1e-6);
  EXPECT_NEAR(e.values()[1], 0.8, 1e-6);
}

TEST(Embedding, ZeroVectorRejected) {
  const std::vector<double> raw{0.0, 0.0};
  EXPECT_THROW(Embedding{std::span<const double>(raw)}, DegenerateTemplate);
}

TEST(BBox, Validity) {
  EXPECT_TRUE((BBox{0, 0, 1, 1}.valid()));
  EXPECT_FALSE((BBox{0, 0, 0, 1}.valid()));
  EXPECT_FALSE((BBox{0, 0, 1, -2}.valid()));
  EXPECT_FALSE((BBox{NAN, 0, 1, 1}.valid()));
}

TEST(Config, DefaultsValidate) {
  Config cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.lambda_iou, 0.25);
  EXPECT_DOUBLE_EQ(cfg.lambda_fbtr, 0.5);
  EXPECT_DOUBLE_EQ(cfg.lambda_s_fbtr, 0.7);
  EXPECT_DOUBLE_EQ(cfg.epsilon, 0.8);
  EXPECT_EQ(cfg.rank_window, 6);
  EXPECT_EQ(cfg.max_coast, 30);
}

TEST(Config, RejectsOutOfRange) {
  Config cfg;
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = Config{};
  cfg.lambda_fbtr = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = Config{};
  cfg.rank_window = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = Config{};
  cfg.fbtr_mode = FbtrMode::Off;  // correction still on
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Config, CosineProfileMapsThresholds) {
  const Config cfg = cosine_profile();
  EXPECT_DOUBLE_EQ(cfg.lambda_fbtr, (1.0 + 0.5) / 2.0);
  EXPECT_DOUBLE_EQ(cfg.lambda_s_fbtr, (1.0 + 0.7) / 2.0);
  EXPECT_DOUBLE_EQ(from_cosine(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(from_cosine(0.0), 0.5);
}

TEST(Config, ModeSpellings) {
  EXPECT_EQ(parse_fbtr_mode("rank"), FbtrMode::RankBased);
  EXPECT_EQ(parse_predictor("cv"), PredictorKind::ConstantVelocity);
  EXPECT_EQ(parse_candidate_policy("exclude"), CandidatePolicy::ExcludeBusy);
  EXPECT_THROW(parse_fbtr_mode("full"), std::invalid_argument);
  for (auto m : {FbtrMode::Off, FbtrMode::Simplified, FbtrMode::RankBased}) {
    EXPECT_EQ(parse_fbtr_mode(to_string(m)), m);
  }
}

TEST(Tracklet, NewHoldsOneDetection) {
  TrackIdAllocator ids;
  const auto t = tracklet_new(det_at(0, 1), 0, ids.next());
  EXPECT_EQ(t.status, TrackStatus::Active);
  EXPECT_EQ(t.coast_count, 0);
  ASSERT_EQ(t.detections.size(), 1u);
  EXPECT_EQ(t.detections[0].det, DetId{1});
  EXPECT_TRUE(t.enrollables.empty());
  EXPECT_TRUE(t.verifiables.empty());
  const auto u = tracklet_new(det_at(0, 2), 0, ids.next());
  EXPECT_NE(t.id, u.id);
}

TEST(Tracklet, StepWithDetectionStaysActive) {
  auto t = tracklet_new(det_at(0, 1), 0, TrackId{1});
  const auto d = det_at(1, 2, {12, 10, 20, 20});
  tracklet_step(t, &d, 1, 30);
  EXPECT_EQ(t.status, TrackStatus::Active);
  EXPECT_EQ(t.coast_count, 0);
  EXPECT_EQ(t.detections.size(), 2u);
  EXPECT_EQ(t.last_update_frame, 1);
}

TEST(Tracklet, MissCoastsThenDies) {
  const int t_max = 30;
  auto t = tracklet_new(det_at(0, 1), 0, TrackId{1});
  tracklet_step(t, nullptr, 1, t_max);
  EXPECT_EQ(t.status, TrackStatus::Coasting);
  EXPECT_EQ(t.coast_count, 1);
  for (int f = 2; f <= t_max; ++f) tracklet_step(t, nullptr, f, t_max);
  EXPECT_EQ(t.status, TrackStatus::Coasting);
  EXPECT_EQ(t.coast_count, t_max);
  tracklet_step(t, nullptr, t_max + 1, t_max);
  EXPECT_EQ(t.status, TrackStatus::Dead);
  EXPECT_THROW(tracklet_step(t, nullptr, t_max + 2, t_max), std::logic_error);
}

TEST(Tracklet, ZeroCoastDiesOnFirstMiss) {
  auto t = tracklet_new(det_at(0, 1), 0, TrackId{1});
  tracklet_step(t, nullptr, 1, 0);
  EXPECT_EQ(t.status, TrackStatus::Dead);
}

TEST(Tracklet, CoastingRecoversOnDetection) {
  auto t = tracklet_new(det_at(0, 1), 0, TrackId{1});
  tracklet_step(t, nullptr, 1, 30);
  const auto d = det_at(2, 2);
  tracklet_step(t, &d, 2, 30);
  EXPECT_EQ(t.status, TrackStatus::Active);
  EXPECT_EQ(t.coast_count, 0);
}

// --- quality ---------------------------------------------------------------

TEST(Quality, ThresholdExamples) {
  const Config cfg;
  EXPECT_EQ(quality::classify(QualityAttrs{0.96, 0, 0, 0, 0.95}, cfg), quality::QualityClass::Enrollable);
  EXPECT_EQ(quality::classify(QualityAttrs{0.85, 40, 0, 0, 0.8}, cfg), quality::QualityClass::Verifiable);
  EXPECT_EQ(quality::classify(QualityAttrs{0.5, 0, 0, 0, 1.0}, cfg), quality::QualityClass::Discarded);
}

TEST(Quality, BoundsAreInclusive) {
  const Config cfg;
  EXPECT_EQ(quality::classify(QualityAttrs{0.95, 25, -25, 25, 0.9}, cfg), quality::QualityClass::Enrollable);
  EXPECT_EQ(quality::classify(QualityAttrs{0.8, 60, -60, 60, 0.75}, cfg), quality::QualityClass::Verifiable);
  EXPECT_EQ(quality::classify(QualityAttrs{0.8, 60.001, 0, 0, 0.75}, cfg), quality::QualityClass::Discarded);
}

TEST(Quality, EnrollableImpliesVerifiableAndMonotone) {
  const Config cfg;
  // A grid over every attribute; improving any one attribute never demotes.
  const double confs[] = {0.5, 0.8, 0.9, 0.95, 1.0};
  const double angles[] = {0, 20, 25, 40, 60, 70};
  const double sharps[] = {0.5, 0.75, 0.85, 0.9, 1.0};
  auto rank = [](quality::QualityClass c) { return static_cast<int>(c); };
  for (double c : confs) {
    for (double a : angles) {
      for (double s : sharps) {
        const QualityAttrs q{c, a, -a, a / 2, s};
        const auto cls = quality::classify(q, cfg);
        if (cls == quality::QualityClass::Enrollable) {
          EXPECT_TRUE(quality::meets(q, cfg.verify));
        }
        QualityAttrs better = q;
        better.det_confidence = std::min(1.0, c + 0.1);
        EXPECT_GE(rank(quality::classify(better, cfg)), rank(cls));
        better = q;
        better.sharpness = std::min(1.0, s + 0.1);
        EXPECT_GE(rank(quality::classify(better, cfg)), rank(cls));
        better = q;
        better.yaw = a / 2;
        EXPECT_GE(rank(quality::classify(better, cfg)), rank(cls));
      }
    }
  }
}
