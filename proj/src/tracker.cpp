#include "lttrack/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "lttrack/assoc.hpp"
#include "lttrack/quality.hpp"

namespace lttrack {

Tracker::Tracker(Config cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  // Without the tracking module, association only links detections of
  // consecutive frames: no prediction and no coasting.
  predictor_ = cfg_.tm_enabled ? cfg_.predictor : PredictorKind::Static;
  max_coast_ = cfg_.tm_enabled ? cfg_.max_coast : 0;
}

Tracklet& Tracker::at(TrackId id) {
  auto it = tracklets_.find(id);
  if (it == tracklets_.end()) throw std::logic_error("unknown tracklet " + std::to_string(to_int(id)));
  return it->second;
}

std::vector<TrackId> Tracker::preload(std::span<const TemplateSet> ghosts) {
  if (last_frame_) throw std::logic_error("preload: tracking already started");
  std::vector<TrackId> assigned;
  assigned.reserve(ghosts.size());
  for (const auto& g : ghosts) {
    if (g.enrollables.empty()) {
      throw std::invalid_argument("preload: distractor " + std::to_string(g.id) +
                                  " has no enrollable template");
    }
    const TrackId id = ids_.next();
    const std::size_t dim = g.enrollables.front().dim();
    Tracklet t{
        .id = id,
        .status = TrackStatus::Dead,
        .birth_frame = 0,
        .last_update_frame = 0,
        .coast_count = 0,
        .last_box = BBox{},
        .predictor = motion::Predictor::make(PredictorKind::Static, BBox{}),
        .enrollables = g.enrollables,
        .verifiables = g.verifiables,
        .verifiable_sum = EmbeddingSum(dim),
        .detections = {},
    };
    for (const auto& e : g.verifiables) t.verifiable_sum.add(e);
    for (const auto& e : g.enrollables) gallery_.add(id, e);
    tracklets_.emplace(id, std::move(t));
    assigned.push_back(id);
  }
  return assigned;
}

void Tracker::gate_templates(Tracklet& t, const Detection& det) {
  const auto cls = quality::classify(det.quality, cfg_);
  if (!quality::is_verifiable(cls)) return;
  t.verifiables.push_back(det.embedding);
  t.verifiable_sum.add(det.embedding);
  if (cls == quality::QualityClass::Enrollable) {
    t.enrollables.push_back(det.embedding);
    gallery_.add(t.id, det.embedding);
  }
}

void Tracker::coast_all(FrameIndex frame) {
  for (auto it = live_.begin(); it != live_.end();) {
    Tracklet& t = at(*it);
    tracklet_step(t, nullptr, frame, max_coast_);
    it = t.alive() ? std::next(it) : live_.erase(it);
  }
  ++stats_.frames;
}

FrameOutput Tracker::process_frame(FrameIndex frame, std::span<const Detection> dets) {
  if (last_frame_ && frame <= *last_frame_) {
    throw std::invalid_argument("process_frame: frame " + std::to_string(frame) +
                                " does not follow frame " + std::to_string(*last_frame_));
  }
  for (const auto& d : dets) {
    if (d.frame != frame) {
      throw std::invalid_argument("process_frame: detection " + std::to_string(to_int(d.id)) +
                                  " belongs to frame " + std::to_string(d.frame));
    }
  }
  if (last_frame_) {
    for (FrameIndex f = *last_frame_ + 1; f < frame; ++f) coast_all(f);
  }
  last_frame_ = frame;
  ++stats_.frames;
  stats_.detections += static_cast<std::int64_t>(dets.size());

  // Data association against the predicted boxes of live tracklets.
  const std::vector<TrackId> live(live_.begin(), live_.end());
  std::vector<BBox> predicted;
  predicted.reserve(live.size());
  for (TrackId id : live) predicted.push_back(at(id).predictor.predict().box);
  std::vector<BBox> boxes;
  boxes.reserve(dets.size());
  for (const auto& d : dets) boxes.push_back(d.box);
  const auto assignment = assoc::associate(predicted, boxes, cfg_.lambda_iou);

  std::vector<TrackId> owner(dets.size());
  std::set<TrackId> busy;
  std::vector<TrackId> queries;

  for (const auto& [row, col] : assignment.pairs) {
    Tracklet& t = at(live[row]);
    tracklet_step(t, &dets[col], frame, max_coast_);
    gate_templates(t, dets[col]);
    owner[col] = t.id;
    busy.insert(t.id);
    if (t.verifiable_sum.count() > 0 &&
        quality::is_verifiable(quality::classify(dets[col].quality, cfg_))) {
      queries.push_back(t.id);
    }
  }
  for (std::size_t row : assignment.unmatched_tracklets) {
    Tracklet& t = at(live[row]);
    tracklet_step(t, nullptr, frame, max_coast_);
    if (!t.alive()) live_.erase(t.id);
  }
  for (std::size_t col : assignment.unmatched_detections) {
    const TrackId id = ids_.next();
    auto [it, inserted] =
        tracklets_.emplace(id, tracklet_new(dets[col], frame, id, predictor_, cfg_.kalman));
    Tracklet& t = it->second;
    ++stats_.tracklets_created;
    gate_templates(t, dets[col]);
    live_.insert(id);
    owner[col] = id;
    busy.insert(id);
    if (t.verifiable_sum.count() > 0) queries.push_back(id);
  }

  FrameOutput out;
  out.frame = frame;

  if (cfg_.fbtr_mode != FbtrMode::Off) {
    std::sort(queries.begin(), queries.end());
    for (TrackId qid : queries) {
      Tracklet& q = at(qid);
      if (!q.alive() || !busy.count(qid)) continue;  // absorbed earlier in this frame
      std::optional<Embedding> query_mean;
      try {
        query_mean.emplace(q.verifiable_sum.mean());
      } catch (const DegenerateTemplate&) {
        continue;
      }
      ++stats_.queries;
      const auto decision = reconnect::try_reconnect(
          qid, *query_mean, gallery_, cfg_, [&busy](TrackId id) { return busy.count(id) != 0; });
      ++stats_.outcomes[decision.outcome];
      if (decision.outcome != reconnect::Outcome::Fused) continue;

      Tracklet& target = at(*decision.target);
      if (observer_) observer_(FusionEvent{{qid, target.id, frame}, q.detections, target.detections});
      const auto pair = reconnect::fuse(q, target, gallery_, frame);
      live_.erase(qid);
      if (target.alive()) live_.insert(target.id);
      busy.erase(qid);
      busy.insert(target.id);
      for (auto& o : owner) {
        if (o == qid) o = target.id;
      }
      joins_.push_back(pair);
      out.joins.push_back(pair);
      if (cfg_.cm_enabled) record_.apply_join(pair);
    }
  }

  out.assignments.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    record_.emit(dets[i].id, frame, owner[i]);
    out.assignments.emplace_back(dets[i].id, owner[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

RunResult run_pipeline(const Config& cfg, std::span<const Detection> stream,
                       std::span<const TemplateSet> ghosts,
                       std::function<void(const FusionEvent&)> observer) {
  Tracker tracker(cfg);
  if (!ghosts.empty()) tracker.preload(ghosts);
  if (observer) tracker.set_fusion_observer(std::move(observer));

  const auto start = std::chrono::steady_clock::now();
  std::size_t begin = 0;
  while (begin < stream.size()) {
    std::size_t end = begin + 1;
    while (end < stream.size() && stream[end].frame == stream[begin].frame) ++end;
    tracker.process_frame(stream[begin].frame, stream.subspan(begin, end - begin));
    begin = end;
  }
  const auto stop = std::chrono::steady_clock::now();

  RunResult result;
  result.entries = tracker.record().entries();
  result.joins = tracker.joins();
  result.stats = tracker.stats();
  result.seconds = std::chrono::duration<double>(stop - start).count();
  return result;
}

std::vector<metrics::EvalRecord> eval_records(std::span<const correction::RecordEntry> entries,
                                              std::span<const Detection> stream) {
  std::unordered_map<std::int64_t, std::int64_t> gt;
  gt.reserve(stream.size());
  for (const auto& d : stream) {
    if (d.gt_id) gt.emplace(to_int(d.id), *d.gt_id);
  }
  std::vector<metrics::EvalRecord> out;
  out.reserve(gt.size());
  for (const auto& e : entries) {
    auto it = gt.find(to_int(e.det));
    if (it == gt.end()) continue;
    out.push_back(metrics::EvalRecord{e.det, e.frame, it->second, e.corrected});
  }
  return out;
}

}  // namespace lttrack
