#include "lttrack/tracklet.hpp"

#include <stdexcept>
#include <string>

namespace lttrack {

std::string_view to_string(TrackStatus status) {
  switch (status) {
    case TrackStatus::Active: return "active";
    case TrackStatus::Coasting: return "coasting";
    case TrackStatus::Dead: return "dead";
  }
  return "?";
}

Tracklet tracklet_new(const Detection& detection, FrameIndex frame, TrackId id,
                      PredictorKind predictor, KalmanNoise noise) {
  if (detection.frame != frame) {
    throw std::invalid_argument("tracklet_new: detection belongs to another frame");
  }
  return Tracklet{
      .id = id,
      .status = TrackStatus::Active,
      .birth_frame = frame,
      .last_update_frame = frame,
      .coast_count = 0,
      .last_box = detection.box,
      .predictor = motion::Predictor::make(predictor, detection.box, noise),
      .enrollables = {},
      .verifiables = {},
      .verifiable_sum = EmbeddingSum(detection.embedding.dim()),
      .detections = {TrackPoint{frame, detection.id}},
  };
}

void tracklet_step(Tracklet& t, const Detection* assigned, FrameIndex frame, int max_coast) {
  if (t.status == TrackStatus::Dead) {
    throw std::logic_error("tracklet_step: tracklet " + std::to_string(to_int(t.id)) +
                           " is dead");
  }
  t.predictor.advance();
  if (assigned != nullptr) {
    t.predictor.correct(assigned->box);
    t.status = TrackStatus::Active;
    t.coast_count = 0;
    t.last_update_frame = frame;
    t.last_box = assigned->box;
    t.detections.push_back(TrackPoint{frame, assigned->id});
    return;
  }
  if (t.coast_count + 1 > max_coast) {
    t.status = TrackStatus::Dead;
    return;
  }
  ++t.coast_count;
  t.status = TrackStatus::Coasting;
}

}  // namespace lttrack
