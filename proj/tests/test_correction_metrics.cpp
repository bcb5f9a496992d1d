#include <gtest/gtest.h>

#include <map>
#include <random>
#include <vector>

#include "lttrack/correction.hpp"
#include "lttrack/metrics.hpp"
#include "oracles.hpp"

using namespace lttrack;
using correction::JoinStatus;

namespace {

reconnect::JoinPair join(std::int64_t absorbed, std::int64_t surviving, FrameIndex frame = 0) {
  return reconnect::JoinPair{TrackId{absorbed}, TrackId{surviving}, frame};
}

}  // namespace

TEST(Correction, SingleJoinRelabelsPast) {
  correction::TrackRecord rec;
  rec.emit(DetId{1}, 0, TrackId{4});
  rec.emit(DetId{2}, 1, TrackId{4});
  rec.emit(DetId{3}, 1, TrackId{3});
  EXPECT_EQ(rec.apply_join(join(4, 3)), JoinStatus::Applied);
  for (int d = 1; d <= 3; ++d) EXPECT_EQ(rec.corrected(DetId{d}), TrackId{3});
  EXPECT_EQ(rec.emitted(DetId{1}), TrackId{4});
  EXPECT_EQ(rec.count(TrackId{3}), 3u);
  EXPECT_EQ(rec.count(TrackId{4}), 0u);
}

TEST(Correction, JoinWithoutDetectionsIsNoOp) {
  correction::TrackRecord rec;
  rec.emit(DetId{1}, 0, TrackId{1});
  EXPECT_EQ(rec.apply_join(join(9, 1)), JoinStatus::UnknownAbsorbed);
  EXPECT_EQ(rec.corrected(DetId{1}), TrackId{1});
  EXPECT_TRUE(rec.joins().empty());
}

TEST(Correction, ChainedJoinsEndAtLastSurvivor) {
  correction::TrackRecord rec;
  rec.emit(DetId{1}, 0, TrackId{5});
  rec.emit(DetId{2}, 0, TrackId{4});
  rec.emit(DetId{3}, 0, TrackId{3});
  rec.apply_join(join(5, 4));
  rec.apply_join(join(4, 3));
  for (int d = 1; d <= 3; ++d) EXPECT_EQ(rec.corrected(DetId{d}), TrackId{3});
}

TEST(Correction, JoinIsIdempotent) {
  correction::TrackRecord rec;
  rec.emit(DetId{1}, 0, TrackId{2});
  rec.emit(DetId{2}, 0, TrackId{1});
  EXPECT_EQ(rec.apply_join(join(2, 1)), JoinStatus::Applied);
  EXPECT_EQ(rec.apply_join(join(2, 1)), JoinStatus::Redundant);
  EXPECT_EQ(rec.joins().size(), 1u);
  EXPECT_EQ(rec.corrected(DetId{1}), TrackId{1});
}

TEST(Correction, EmitRules) {
  correction::TrackRecord rec;
  rec.emit(DetId{1}, 0, TrackId{2});
  EXPECT_THROW(rec.emit(DetId{1}, 1, TrackId{2}), std::invalid_argument);
  rec.emit(DetId{2}, 0, TrackId{1});
  rec.apply_join(join(2, 1));
  EXPECT_THROW(rec.emit(DetId{3}, 1, TrackId{2}), std::logic_error);
}

TEST(Correction, UnionFindEqualsEagerRewriteOnRandomLogs) {
  std::mt19937_64 gen(17);
  for (int log = 0; log < 200; ++log) {
    correction::TrackRecord fast;
    correction::EagerTrackRecord eager;
    oracle::Relabeler slow;
    std::uniform_int_distribution<std::int64_t> id(1, 12);
    std::int64_t next_det = 1;
    for (int step = 0; step < 120; ++step) {
      if (gen() % 3 != 0) {
        std::int64_t t = id(gen);
        if (slow.absorbed(t)) continue;
        fast.emit(DetId{next_det}, step, TrackId{t});
        eager.emit(DetId{next_det}, step, TrackId{t});
        slow.emit(next_det, t);
        ++next_det;
      } else {
        const auto a = id(gen);
        const auto s = id(gen);
        const auto status = fast.apply_join(join(a, s, step));
        EXPECT_EQ(status, eager.apply_join(join(a, s, step)));
        slow.join(a, s);
      }
    }
    for (const auto& [det, label] : slow.labels) {
      EXPECT_EQ(to_int(*fast.corrected(DetId{det})), label);
      EXPECT_EQ(to_int(*eager.current(DetId{det})), label);
    }
    // No detection keeps an id that was absorbed by an applied join.
    for (const auto& j : fast.joins()) {
      EXPECT_EQ(fast.count(j.absorbed), 0u);
    }
  }
}

// --- metrics ---------------------------------------------------------------

namespace {

std::vector<metrics::EvalRecord> to_eval(const std::vector<oracle::Record>& recs) {
  std::vector<metrics::EvalRecord> out;
  std::int64_t det = 1;
  for (const auto& r : recs) {
    metrics::EvalRecord e{DetId{det++}, r.frame, r.gt, std::nullopt};
    if (r.track) e.track = TrackId{*r.track};
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST(Metrics, PerfectTracking) {
  std::vector<oracle::Record> recs;
  for (int f = 0; f < 10; ++f) {
    recs.push_back({f, 1, 1});
    recs.push_back({f, 2, 2});
  }
  const auto r = metrics::evaluate(to_eval(recs));
  EXPECT_EQ(r.smme_count, 0);
  EXPECT_EQ(r.hmme_count, 0);
  EXPECT_DOUBLE_EQ(r.crs, 1.0);
  EXPECT_DOUBLE_EQ(r.frag, 0.0);
}

TEST(Metrics, SoftSwitchToFreshId) {
  const std::vector<oracle::Record> recs{{0, 1, 1}, {1, 1, 1}, {2, 1, 2}, {3, 1, 2}};
  const auto m = metrics::count_mismatches(to_eval(recs));
  EXPECT_EQ(m.smme, 1);
  EXPECT_EQ(m.hmme, 0);
}

TEST(Metrics, HardSwitchToUsedId) {
  // g1 holds track 1 throughout; g2 goes 2, 2, 1.
  const std::vector<oracle::Record> recs{{0, 1, 1}, {0, 2, 2}, {1, 1, 1}, {1, 2, 2}, {2, 1, 1}, {2, 2, 1}};
  const auto m = metrics::count_mismatches(to_eval(recs));
  EXPECT_EQ(m.smme, 0);
  EXPECT_EQ(m.hmme, 1);
}

TEST(Metrics, CompletionExamples) {
  // One identity split evenly across two tracks.
  std::vector<oracle::Record> half;
  for (int f = 0; f < 10; ++f) half.push_back({f, 1, f < 5 ? 1 : 2});
  const auto crp = metrics::completion_rates(to_eval(half));
  EXPECT_DOUBLE_EQ(crp[49], 1.0);
  EXPECT_DOUBLE_EQ(crp[50], 0.0);

  // Completions 1.0, 0.6 and 0.2.
  std::vector<oracle::Record> three;
  for (int f = 0; f < 10; ++f) {
    three.push_back({f, 1, 1});
    three.push_back({f, 2, f < 6 ? 2 : 3});
    three.push_back({f, 3, f < 2 ? 4 : std::optional<std::int64_t>{}});
  }
  const auto c3 = metrics::completion_rates(to_eval(three));
  EXPECT_DOUBLE_EQ(c3[49], 2.0 / 3.0);
}

TEST(Metrics, FragIsSoftOverDetections) {
  std::vector<oracle::Record> recs;
  for (int f = 0; f < 100; ++f) recs.push_back({f, 1, f < 50 ? 1 : 2});
  const auto r = metrics::evaluate(to_eval(recs));
  EXPECT_EQ(r.num_dets, 100);
  EXPECT_DOUBLE_EQ(r.frag, 0.01);
}

TEST(Metrics, ErrorsAndOrdering) {
  EXPECT_THROW(metrics::evaluate({}), std::invalid_argument);
  metrics::Evaluator ev;
  ev.add(metrics::EvalRecord{DetId{1}, 5, 1, TrackId{1}});
  EXPECT_THROW(ev.add(metrics::EvalRecord{DetId{2}, 4, 1, TrackId{1}}), std::invalid_argument);
}

TEST(Metrics, UnassignedDetectionsAreUncoveredButSilent) {
  const std::vector<oracle::Record> recs{{0, 1, 1}, {1, 1, std::nullopt}, {2, 1, 1}, {3, 1, std::nullopt}};
  const auto r = metrics::evaluate(to_eval(recs));
  EXPECT_EQ(r.smme_count + r.hmme_count, 0);
  EXPECT_DOUBLE_EQ(r.crp[49], 1.0);
  EXPECT_DOUBLE_EQ(r.crp[50], 0.0);
}

TEST(Metrics, StreamingEqualsNaiveOracleOnRandomTraces) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int ids = 1 + static_cast<int>(gen() % 6);
    const int tracks = 1 + static_cast<int>(gen() % 8);
    std::vector<oracle::Record> recs;
    for (int f = 0; f < 40; ++f) {
      for (int g = 1; g <= ids; ++g) {
        if (gen() % 4 == 0) continue;
        const bool none = gen() % 10 == 0;
        recs.push_back({f, g, none ? std::nullopt : std::optional<std::int64_t>(1 + gen() % tracks)});
      }
    }
    if (recs.empty()) continue;
    const auto r = metrics::evaluate(to_eval(recs));
    const auto [smme, hmme] = oracle::naive_mismatches(recs);
    EXPECT_EQ(r.smme_count, smme);
    EXPECT_EQ(r.hmme_count, hmme);
    const auto crp = oracle::naive_completion(recs);
    double sum = 0.0;
    for (int x = 0; x < 100; ++x) {
      EXPECT_EQ(r.crp[static_cast<std::size_t>(x)], crp[static_cast<std::size_t>(x)]);
      if (x > 0) {
        EXPECT_LE(r.crp[static_cast<std::size_t>(x)], r.crp[static_cast<std::size_t>(x - 1)]);
      }
      sum += crp[static_cast<std::size_t>(x)];
    }
    EXPECT_NEAR(r.crs, sum / 100.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.frag, static_cast<double>(smme) / static_cast<double>(recs.size()));
    EXPECT_DOUBLE_EQ(r.idsw, static_cast<double>(hmme) / static_cast<double>(recs.size()));
  }
}

TEST(Metrics, RelabelingTracksLeavesReportUnchanged) {
  std::mt19937_64 gen(5);
  std::vector<oracle::Record> recs;
  for (int f = 0; f < 60; ++f) {
    for (int g = 1; g <= 4; ++g) recs.push_back({f, g, static_cast<std::int64_t>(1 + gen() % 6)});
  }
  auto relabeled = recs;
  for (auto& r : relabeled) r.track = 100 - *r.track;  // bijection
  const auto a = metrics::evaluate(to_eval(recs));
  const auto b = metrics::evaluate(to_eval(relabeled));
  EXPECT_EQ(a.smme_count, b.smme_count);
  EXPECT_EQ(a.hmme_count, b.hmme_count);
  EXPECT_EQ(a.crp, b.crp);
}
