#pragma once

#include <string_view>
#include <vector>

#include "lttrack/config.hpp"
#include "lttrack/motion.hpp"
#include "lttrack/types.hpp"

namespace lttrack {

enum class TrackStatus { Active, Coasting, Dead };

std::string_view to_string(TrackStatus status);

struct TrackPoint {
  FrameIndex frame = 0;
  DetId det{};

  friend auto operator<=>(const TrackPoint&, const TrackPoint&) = default;
};

/// A live or dead identity hypothesis.
///
/// Status moves Active <-> Coasting -> Dead. A Dead tracklet is only touched
/// again when a reconnection picks it as the surviving side of a fusion,
/// which hands it the absorbed tracklet's live state.
struct Tracklet {
  TrackId id{};
  TrackStatus status = TrackStatus::Active;
  FrameIndex birth_frame = 0;
  FrameIndex last_update_frame = 0;
  int coast_count = 0;
  BBox last_box;
  motion::Predictor predictor;
  std::vector<Embedding> enrollables;
  std::vector<Embedding> verifiables;
  EmbeddingSum verifiable_sum;
  std::vector<TrackPoint> detections;  // sorted by (frame, det)

  bool alive() const { return status != TrackStatus::Dead; }
};

class TrackIdAllocator {
 public:
  TrackId next() { return TrackId{next_++}; }
  std::int64_t peek() const { return next_; }

 private:
  std::int64_t next_ = 1;
};

/// Starts an Active tracklet holding exactly `detection`. Template stores
/// start empty; the quality gate fills them separately.
Tracklet tracklet_new(const Detection& detection, FrameIndex frame, TrackId id,
                      PredictorKind predictor = PredictorKind::KalmanCV,
                      KalmanNoise noise = {});

/// Advances `t` by one frame. With `assigned` the tracklet becomes Active and
/// the predictor is corrected with the observed box; without it the tracklet
/// coasts, and dies once it would coast more than `max_coast` frames
/// (`max_coast == 0` kills it on the first miss).
///
/// Throws std::logic_error when `t` is Dead.
void tracklet_step(Tracklet& t, const Detection* assigned, FrameIndex frame, int max_coast);

}  // namespace lttrack
