#include <gtest/gtest.h>

#include <map>
#include <set>
#include <vector>

#include "lttrack/metrics.hpp"
#include "lttrack/sim.hpp"
#include "lttrack/tracker.hpp"

using namespace lttrack;

namespace {

std::map<std::int64_t, std::set<std::int64_t>> ids_per_person(const std::vector<correction::RecordEntry>& entries,
                                                             const std::vector<Detection>& stream, bool corrected) {
  std::map<std::int64_t, std::int64_t> gt;
  for (const auto& d : stream) gt[to_int(d.id)] = *d.gt_id;
  std::map<std::int64_t, std::set<std::int64_t>> out;
  for (const auto& e : entries) out[gt.at(to_int(e.det))].insert(to_int(corrected ? e.corrected : e.emitted));
  return out;
}

Detection det(std::int64_t id, FrameIndex frame, BBox box) {
  const std::vector<double> raw{1.0, 0.0, 0.0};
  return Detection{frame, DetId{id}, box, Embedding(raw), QualityAttrs{0.9, 0, 0, 0, 0.9}, std::nullopt};
}

}  // namespace

TEST(Tracker, RejectsOutOfOrderFrames) {
  Tracker t(Config{});
  const std::vector<Detection> f5{det(1, 5, BBox{0, 0, 10, 10})};
  t.process_frame(5, f5);
  EXPECT_THROW(t.process_frame(5, {}), std::invalid_argument);
  EXPECT_THROW(t.process_frame(4, {}), std::invalid_argument);
  const std::vector<Detection> wrong{det(2, 9, BBox{0, 0, 10, 10})};
  EXPECT_THROW(t.process_frame(7, wrong), std::invalid_argument);
}

TEST(Tracker, PreloadOnlyBeforeFirstFrame) {
  Tracker t(Config{});
  const auto ghosts = sim::make_ghosts(3, 2, 1, 3);
  EXPECT_EQ(t.preload(ghosts).size(), 3u);
  EXPECT_EQ(t.live_count(), 0u);
  t.process_frame(0, {});
  EXPECT_THROW(t.preload(ghosts), std::logic_error);
}

TEST(Tracker, StaticBoxKeepsOneId) {
  Tracker t(Config{});
  for (FrameIndex f = 0; f < 20; ++f) {
    const std::vector<Detection> d{det(f + 1, f, BBox{100, 100, 40, 40})};
    const auto out = t.process_frame(f, d);
    ASSERT_EQ(out.assignments.size(), 1u);
    EXPECT_EQ(out.assignments[0].second, TrackId{1});
  }
  EXPECT_EQ(t.stats().tracklets_created, 1);
}

TEST(Tracker, SameInputSameOutput) {
  const auto g = sim::generate(sim::benchmark_suite().front());
  for (const auto& cfg : {Config{}, cosine_profile()}) {
    const auto a = run_pipeline(cfg, g.detections);
    const auto b = run_pipeline(cfg, g.detections);
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      EXPECT_EQ(a.entries[i].det, b.entries[i].det);
      EXPECT_EQ(a.entries[i].emitted, b.entries[i].emitted);
      EXPECT_EQ(a.entries[i].corrected, b.entries[i].corrected);
    }
    EXPECT_EQ(a.joins.size(), b.joins.size());
  }
}

TEST(Tracker, OneEntryPerDetection) {
  const auto g = sim::generate(sim::benchmark_suite()[2]);
  const auto run = run_pipeline(cosine_profile(), g.detections);
  ASSERT_EQ(run.entries.size(), g.detections.size());
  for (std::size_t i = 0; i < g.detections.size(); ++i) EXPECT_EQ(run.entries[i].det, g.detections[i].id);
}

TEST(Tracker, CorrectionSceneFragmentsThenReconnects) {
  const auto g = sim::generate(sim::correction_scene());
  auto cfg = cosine_profile();

  cfg.fbtr_mode = FbtrMode::Off;
  cfg.cm_enabled = false;
  const auto plain = run_pipeline(cfg, g.detections);
  EXPECT_GE(ids_per_person(plain.entries, g.detections, false).at(1).size(), 2u);

  cfg.fbtr_mode = FbtrMode::RankBased;
  const auto no_cm = run_pipeline(cfg, g.detections);
  ASSERT_FALSE(no_cm.joins.empty());
  // Without correction the past keeps the absorbed id.
  const auto emitted = ids_per_person(no_cm.entries, g.detections, false).at(1);
  EXPECT_GE(emitted.size(), 2u);

  cfg.cm_enabled = true;
  const auto with_cm = run_pipeline(cfg, g.detections);
  EXPECT_EQ(ids_per_person(with_cm.entries, g.detections, true).at(1).size(), 1u);
  EXPECT_EQ(ids_per_person(with_cm.entries, g.detections, true).at(2).size(), 1u);
  const auto r_no = metrics::evaluate(eval_records(no_cm.entries, g.detections));
  const auto r_cm = metrics::evaluate(eval_records(with_cm.entries, g.detections));
  EXPECT_LT(r_cm.smme_count, r_no.smme_count);
  EXPECT_DOUBLE_EQ(r_cm.crs, 1.0);
}

TEST(Tracker, GhostsLeaveCorrectionSceneUnchanged) {
  const auto g = sim::generate(sim::correction_scene());
  const auto ghosts = sim::make_ghosts(50, 4, 7);
  const auto plain = run_pipeline(cosine_profile(), g.detections);
  const auto crowded = run_pipeline(cosine_profile(), g.detections, ghosts);
  const auto a = metrics::evaluate(eval_records(plain.entries, g.detections));
  const auto b = metrics::evaluate(eval_records(crowded.entries, g.detections));
  EXPECT_EQ(a.smme_count, b.smme_count);
  EXPECT_EQ(a.hmme_count, b.hmme_count);
  EXPECT_EQ(a.crp, b.crp);
}
