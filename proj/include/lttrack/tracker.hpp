#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "lttrack/config.hpp"
#include "lttrack/correction.hpp"
#include "lttrack/metrics.hpp"
#include "lttrack/reconnect.hpp"
#include "lttrack/tracklet.hpp"
#include "lttrack/types.hpp"

namespace lttrack {

struct FrameOutput {
  FrameIndex frame = 0;
  std::vector<std::pair<DetId, TrackId>> assignments;  // input detection order
  std::vector<reconnect::JoinPair> joins;
};

/// Both sides of a fusion, captured just before the merge.
struct FusionEvent {
  reconnect::JoinPair pair;
  std::vector<TrackPoint> absorbed_points;
  std::vector<TrackPoint> surviving_points;
};

struct TrackerStats {
  std::int64_t frames = 0;
  std::int64_t detections = 0;
  std::int64_t tracklets_created = 0;
  std::int64_t queries = 0;
  std::map<reconnect::Outcome, std::int64_t> outcomes;
};

/// Online pipeline: data association, motion prediction, quality gating,
/// reconnection and correction, one frame at a time.
class Tracker {
 public:
  /// Throws std::invalid_argument when `cfg` is invalid.
  explicit Tracker(Config cfg);

  /// Registers distractor identities as dead tracklets whose enrollable
  /// templates join the gallery. Must precede the first frame.
  std::vector<TrackId> preload(std::span<const TemplateSet> ghosts);

  /// Processes `frame`. Frames must increase; skipped frame numbers are
  /// processed as frames without detections. Every detection must carry
  /// `frame`.
  FrameOutput process_frame(FrameIndex frame, std::span<const Detection> detections);

  void set_fusion_observer(std::function<void(const FusionEvent&)> observer) {
    observer_ = std::move(observer);
  }

  const Config& config() const { return cfg_; }
  const correction::TrackRecord& record() const { return record_; }
  const std::vector<reconnect::JoinPair>& joins() const { return joins_; }
  const reconnect::Gallery& gallery() const { return gallery_; }
  const std::map<TrackId, Tracklet>& tracklets() const { return tracklets_; }
  const TrackerStats& stats() const { return stats_; }
  std::size_t live_count() const { return live_.size(); }

 private:
  void coast_all(FrameIndex frame);
  void gate_templates(Tracklet& t, const Detection& det);
  Tracklet& at(TrackId id);

  Config cfg_;
  PredictorKind predictor_;
  int max_coast_;
  TrackIdAllocator ids_;
  std::map<TrackId, Tracklet> tracklets_;
  std::set<TrackId> live_;
  reconnect::Gallery gallery_;
  correction::TrackRecord record_;
  std::vector<reconnect::JoinPair> joins_;
  std::optional<FrameIndex> last_frame_;
  std::function<void(const FusionEvent&)> observer_;
  TrackerStats stats_;
};

struct RunResult {
  std::vector<correction::RecordEntry> entries;  // emission order
  std::vector<reconnect::JoinPair> joins;
  TrackerStats stats;
  double seconds = 0.0;
};

/// Runs a whole stream (sorted by frame) through a fresh tracker.
RunResult run_pipeline(const Config& cfg, std::span<const Detection> stream,
                       std::span<const TemplateSet> ghosts = {},
                       std::function<void(const FusionEvent&)> observer = {});

/// Evaluation records for every detection with ground truth, using the
/// corrected ids (identical to the emitted ids when correction is off).
std::vector<metrics::EvalRecord> eval_records(std::span<const correction::RecordEntry> entries,
                                              std::span<const Detection> stream);

}  // namespace lttrack
