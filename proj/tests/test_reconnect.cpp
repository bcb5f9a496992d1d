#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lttrack/reconnect.hpp"
#include "lttrack/sim.hpp"
#include "lttrack/tracklet.hpp"
#include "oracles.hpp"

using namespace lttrack;
using reconnect::Outcome;

namespace {

Embedding vec(std::initializer_list<double> v) {
  const std::vector<double> raw(v);
  return Embedding(std::span<const double>(raw));
}

Embedding axis(std::size_t dim, std::size_t i) {
  std::vector<double> raw(dim, 0.0);
  raw[i] = 1.0;
  return Embedding(std::span<const double>(raw));
}

}  // namespace

TEST(Similarity, ClosedForms) {
  const auto a = vec({1, 0, 0});
  EXPECT_NEAR(reconnect::similarity(a, a), 1.0, 1e-12);
  EXPECT_NEAR(reconnect::similarity(a, vec({-1, 0, 0})), 0.0, 1e-12);
  EXPECT_NEAR(reconnect::similarity(a, vec({0, 1, 0})), 0.5, 1e-12);
  EXPECT_NEAR(reconnect::similarity(a, vec({1, 1, 0})), (1.0 + 1.0 / std::sqrt(2.0)) / 2.0, 1e-7);
}

TEST(ReferenceTemplate, MeanThenNormalize) {
  const auto e1 = vec({1, 0});
  const auto e2 = vec({0, 1});
  const std::vector<Embedding> one{e1};
  EXPECT_EQ(reconnect::reference_template(one), e1);
  const std::vector<Embedding> same{e1, e1};
  EXPECT_EQ(reconnect::reference_template(same), e1);
  const std::vector<Embedding> both{e1, e2};
  const auto r = reconnect::reference_template(both);
  EXPECT_NEAR(r.values()[0], 1.0 / std::sqrt(2.0), 1e-7);
  EXPECT_NEAR(r.values()[1], 1.0 / std::sqrt(2.0), 1e-7);
  EXPECT_THROW(reconnect::reference_template(std::vector<Embedding>{}), std::invalid_argument);
  const std::vector<Embedding> antipodal{e1, vec({-1, 0})};
  EXPECT_THROW(reconnect::reference_template(antipodal), DegenerateTemplate);
}

TEST(RankMargin, WorkedExamples) {
  const std::vector<double> a{0.9, 0.5, 0.4};
  EXPECT_TRUE(reconnect::check_rank_margin(a, 0.8, 2));  // bound 0.5625
  const std::vector<double> b{0.6, 0.59};
  EXPECT_FALSE(reconnect::check_rank_margin(b, 0.8, 1));  // bound 0.7375
  const std::vector<double> single{0.3};
  EXPECT_TRUE(reconnect::check_rank_margin(single, 0.8, 6));
  EXPECT_THROW(reconnect::check_rank_margin(std::vector<double>{}, 0.8, 6), std::invalid_argument);
  EXPECT_THROW(reconnect::check_rank_margin(a, 0.0, 2), std::invalid_argument);
  EXPECT_THROW(reconnect::check_rank_margin(a, 0.8, 0), std::invalid_argument);
}

TEST(RankMargin, FewerCompetitorsThanWindowAverageAvailable) {
  const std::vector<double> s{0.9, 0.8, 0.6};
  // Window 6 falls back to the two competitors: mean 0.7, bound 0.875.
  EXPECT_TRUE(reconnect::check_rank_margin(s, 0.8, 6));
  EXPECT_FALSE(reconnect::check_rank_margin(s, 0.77, 6));
}

TEST(RankMargin, AgreesWithDirectFormAndIsMonotoneInEpsilon) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 12), window(1, 9);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> s(static_cast<std::size_t>(len(gen)));
    for (auto& x : s) x = u(gen);
    std::sort(s.rbegin(), s.rend());
    const int c = window(gen);
    const double eps = std::max(1e-3, u(gen));
    const bool got = reconnect::check_rank_margin(s, eps, c);
    EXPECT_EQ(got, oracle::rank_margin(s, eps, c));
    if (got) {
      EXPECT_TRUE(reconnect::check_rank_margin(s, std::min(1.0, eps + 0.1), c));
    }
  }
}

TEST(Gallery, CachedReferenceTracksInsertions) {
  reconnect::Gallery g;
  g.add(TrackId{1}, vec({1, 0}));
  EXPECT_TRUE(g.contains(TrackId{1}));
  EXPECT_EQ(g.reference(TrackId{1}), vec({1, 0}));
  g.add(TrackId{1}, vec({0, 1}));
  EXPECT_TRUE(g.dirty(TrackId{1}));
  const auto r = g.reference(TrackId{1});
  EXPECT_FALSE(g.dirty(TrackId{1}));
  EXPECT_NEAR(r.values()[0], r.values()[1], 1e-7);
  EXPECT_EQ(g.template_count(TrackId{1}), 2u);
}

TEST(Gallery, AbsorbUnionsTemplates) {
  reconnect::Gallery g;
  g.add(TrackId{1}, vec({1, 0}));
  g.add(TrackId{2}, vec({0, 1}));
  g.add(TrackId{2}, vec({0, 1}));
  g.absorb(TrackId{2}, TrackId{1});
  EXPECT_FALSE(g.contains(TrackId{2}));
  EXPECT_EQ(g.template_count(TrackId{1}), 3u);
  EXPECT_EQ(g.size(), 1u);
}

TEST(RankCandidates, SortedLikeAFullSort) {
  sim::Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    reconnect::Gallery g;
    std::vector<Embedding> refs;
    for (int i = 1; i <= 10; ++i) {
      refs.push_back(sim::random_unit(rng, 16));
      g.add(TrackId{i}, refs.back());
    }
    const auto q = sim::random_unit(rng, 16);
    const auto ranked = reconnect::rank_candidates(q, g, TrackId{4});
    ASSERT_EQ(ranked.size(), 9u);
    std::vector<std::pair<double, std::int64_t>> expect;
    for (int i = 1; i <= 10; ++i) {
      if (i != 4) expect.emplace_back(-reconnect::similarity(q, refs[static_cast<std::size_t>(i - 1)]), i);
    }
    std::sort(expect.begin(), expect.end());
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      EXPECT_EQ(to_int(ranked[r].id), expect[r].second);
      EXPECT_NEAR(ranked[r].similarity, -expect[r].first, 1e-6);  // gallery keeps float references
    }
  }
}

TEST(RankCandidates, TiesKeepOlderIdFirst) {
  reconnect::Gallery g;
  g.add(TrackId{7}, vec({0, 1, 0}));
  g.add(TrackId{3}, vec({0, 0, 1}));
  g.add(TrackId{5}, vec({1, 0, 0}));
  const auto ranked = reconnect::rank_candidates(vec({1, 0, 0}), g, TrackId{99});
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].id, TrackId{5});
  EXPECT_EQ(ranked[1].id, TrackId{3});
  EXPECT_EQ(ranked[2].id, TrackId{7});
  EXPECT_TRUE(reconnect::rank_candidates(vec({1, 0, 0}), reconnect::Gallery{}, TrackId{1}).empty());
}

TEST(TryReconnect, FusesOnExactMatchWithOrthogonalRivals) {
  reconnect::Gallery g;
  for (int i = 0; i < 8; ++i) g.add(TrackId{i + 1}, axis(16, static_cast<std::size_t>(i)));
  Config cfg;
  const auto d = reconnect::try_reconnect(TrackId{50}, axis(16, 2), g, cfg);
  // sim1 = 1, rivals 0.5: bound 0.5 / 0.8 = 0.625.
  EXPECT_EQ(d.outcome, Outcome::Fused);
  EXPECT_EQ(d.target, TrackId{3});
  EXPECT_DOUBLE_EQ(d.ranked.front().similarity, 1.0);
}

TEST(TryReconnect, BelowThresholdRejected) {
  // cos = -0.1 gives similarity 0.45 < 0.5.
  reconnect::Gallery g;
  g.add(TrackId{1}, vec({1, 0}));
  const double c = -0.1;
  const auto q = vec({c, std::sqrt(1 - c * c)});
  const auto d = reconnect::try_reconnect(TrackId{2}, q, g, Config{});
  EXPECT_NEAR(d.ranked.front().similarity, 0.45, 1e-7);
  EXPECT_EQ(d.outcome, Outcome::RejectedThreshold);
  EXPECT_FALSE(d.target);
}

TEST(TryReconnect, NearTwinsFailRankMargin) {
  // Candidates at similarity 0.8 and 0.79 against the query.
  auto at = [](double s, double phase) {
    const double c = 2 * s - 1;
    const double r = std::sqrt(1 - c * c);
    return vec({c, r * std::cos(phase), r * std::sin(phase)});
  };
  reconnect::Gallery g;
  g.add(TrackId{1}, at(0.8, 0.0));
  g.add(TrackId{2}, at(0.79, 2.0));
  Config cfg;
  cfg.rank_window = 1;
  const auto q = vec({1, 0, 0});
  const auto d = reconnect::try_reconnect(TrackId{3}, q, g, cfg);
  ASSERT_EQ(d.ranked.size(), 2u);
  EXPECT_NEAR(d.ranked[0].similarity, 0.8, 1e-6);
  EXPECT_NEAR(d.ranked[1].similarity, 0.79, 1e-6);
  EXPECT_EQ(d.outcome, Outcome::RejectedRankMargin);

  cfg.fbtr_mode = FbtrMode::Simplified;
  cfg.lambda_s_fbtr = cfg.lambda_fbtr;
  EXPECT_EQ(reconnect::try_reconnect(TrackId{3}, q, g, cfg).outcome, Outcome::Fused);
}

TEST(TryReconnect, EmptyGalleryAndOffMode) {
  Config cfg;
  EXPECT_EQ(reconnect::try_reconnect(TrackId{1}, vec({1, 0}), reconnect::Gallery{}, cfg).outcome,
            Outcome::NoCandidates);
  cfg.fbtr_mode = FbtrMode::Off;
  EXPECT_THROW(reconnect::try_reconnect(TrackId{1}, vec({1, 0}), reconnect::Gallery{}, cfg), std::invalid_argument);
}

TEST(TryReconnect, BusyTopCandidateIsNeverATarget) {
  reconnect::Gallery g;
  g.add(TrackId{1}, vec({1, 0, 0}));
  g.add(TrackId{2}, vec({0, 1, 0}));
  Config cfg;
  const auto busy = [](TrackId id) { return id == TrackId{1}; };
  const auto ranked = reconnect::try_reconnect(TrackId{9}, vec({1, 0, 0}), g, cfg, busy);
  EXPECT_EQ(ranked.outcome, Outcome::RejectedBusyTarget);
  // Excluding busy tracklets lets the query fall through to the next face.
  cfg.candidate_policy = CandidatePolicy::ExcludeBusy;
  const auto excluded = reconnect::try_reconnect(TrackId{9}, vec({1, 0.5, 0}), g, cfg, busy);
  ASSERT_EQ(excluded.ranked.size(), 1u);
  EXPECT_EQ(excluded.outcome, Outcome::Fused);
  EXPECT_EQ(excluded.target, TrackId{2});
}

TEST(TryReconnect, RankBasedFusionsAreSubsetOfSimplified) {
  sim::Rng rng(44);
  for (int trial = 0; trial < 500; ++trial) {
    reconnect::Gallery g;
    const auto base = sim::random_unit(rng, 32);
    const int n = 1 + static_cast<int>(rng.uniform_int(0, 9));
    for (int i = 1; i <= n; ++i) g.add(TrackId{i}, sim::perturb(base, rng.uniform(0.3, 3.0), rng));
    const auto q = sim::perturb(base, rng.uniform(0.3, 3.0), rng);
    Config rank;
    rank.lambda_fbtr = rng.uniform(0.5, 0.95);
    Config simple = rank;
    simple.fbtr_mode = FbtrMode::Simplified;
    simple.lambda_s_fbtr = rank.lambda_fbtr;
    const auto r = reconnect::try_reconnect(TrackId{100}, q, g, rank);
    const auto s = reconnect::try_reconnect(TrackId{100}, q, g, simple);
    if (r.outcome == Outcome::Fused) {
      EXPECT_EQ(s.outcome, Outcome::Fused);
      EXPECT_EQ(r.target, s.target);
    }
  }
}

TEST(TryReconnect, ScaleOfRawEmbeddingsIsIrrelevant) {
  sim::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 6; ++i) {
      std::vector<double> v(8);
      for (auto& x : v) x = rng.normal();
      raw.push_back(v);
    }
    const double k = rng.uniform(0.01, 100.0);
    reconnect::Gallery g1, g2;
    for (int i = 1; i < 6; ++i) {
      auto scaled = raw[static_cast<std::size_t>(i)];
      for (auto& x : scaled) x *= k;
      g1.add(TrackId{i}, Embedding(std::span<const double>(raw[static_cast<std::size_t>(i)])));
      g2.add(TrackId{i}, Embedding(std::span<const double>(scaled)));
    }
    auto q2 = raw[0];
    for (auto& x : q2) x *= k;
    const auto d1 = reconnect::try_reconnect(TrackId{9}, Embedding(std::span<const double>(raw[0])), g1, Config{});
    const auto d2 = reconnect::try_reconnect(TrackId{9}, Embedding(std::span<const double>(q2)), g2, Config{});
    EXPECT_EQ(d1.outcome, d2.outcome);
    EXPECT_EQ(d1.target, d2.target);
  }
}

TEST(Fuse, ConservesDetectionsAndTemplates) {
  const std::vector<double> e{1.0, 0.0};
  auto make = [&](std::int64_t id, FrameIndex f, std::int64_t det) {
    Detection d{f, DetId{det}, BBox{0, 0, 10, 10}, Embedding(std::span<const double>(e)), {}, std::nullopt};
    return tracklet_new(d, f, TrackId{id});
  };
  auto old_t = make(1, 0, 1);
  auto new_t = make(2, 50, 5);
  old_t.enrollables.push_back(vec({1, 0}));
  new_t.enrollables.push_back(vec({1, 0.1}));
  new_t.verifiables.push_back(vec({1, 0.1}));
  old_t.status = TrackStatus::Dead;
  reconnect::Gallery g;
  g.add(TrackId{1}, old_t.enrollables[0]);
  g.add(TrackId{2}, new_t.enrollables[0]);

  const auto pair = reconnect::fuse(new_t, old_t, g, 50);
  EXPECT_EQ(pair, (reconnect::JoinPair{TrackId{2}, TrackId{1}, 50}));
  EXPECT_EQ(old_t.detections.size(), 2u);
  EXPECT_TRUE(new_t.detections.empty());
  EXPECT_EQ(new_t.status, TrackStatus::Dead);
  EXPECT_EQ(old_t.status, TrackStatus::Active);  // took over the live state
  EXPECT_EQ(old_t.enrollables.size(), 2u);
  EXPECT_EQ(old_t.verifiables.size(), 1u);
  EXPECT_EQ(g.template_count(TrackId{1}), 2u);
  EXPECT_FALSE(g.contains(TrackId{2}));
  EXPECT_TRUE(std::is_sorted(old_t.detections.begin(), old_t.detections.end()));
}
