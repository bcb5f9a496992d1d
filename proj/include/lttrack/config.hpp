#pragma once

#include <string>
#include <string_view>

namespace lttrack {

enum class FbtrMode { Off, Simplified, RankBased };
enum class PredictorKind { Static, ConstantVelocity, KalmanCV };

/// Which tracklets may appear in the reconnection ranking.
///
/// A tracklet is "busy" when it already owns a detection in the current
/// frame. Busy tracklets can never absorb another tracklet. Under
/// `RankBusy` they still take part in the ranking, so a query whose best
/// match is a currently visible person is rejected instead of falling
/// through to a weaker, non-busy candidate.
enum class CandidatePolicy { ExcludeBusy, RankBusy };

struct QualityBounds {
  double min_confidence = 0.0;
  double max_abs_angle = 180.0;  // degrees, applied to yaw, pitch and roll
  double min_sharpness = 0.0;
};

/// Scales applied to the SORT-style process / measurement covariances.
struct KalmanNoise {
  double process = 1.0;
  double measurement = 1.0;
};

struct Config {
  double lambda_iou = 0.25;
  double lambda_fbtr = 0.5;
  double lambda_s_fbtr = 0.7;
  double epsilon = 0.8;
  int rank_window = 6;  // competitors averaged by the rank-margin test
  int max_coast = 30;   // frames a tracklet survives without detections

  QualityBounds enroll{0.95, 25.0, 0.9};
  QualityBounds verify{0.8, 60.0, 0.75};

  FbtrMode fbtr_mode = FbtrMode::RankBased;
  CandidatePolicy candidate_policy = CandidatePolicy::RankBusy;
  bool tm_enabled = true;
  bool cm_enabled = true;
  PredictorKind predictor = PredictorKind::KalmanCV;
  KalmanNoise kalman;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Similarity threshold of the active reconnection mode.
  double fusion_threshold() const {
    return fbtr_mode == FbtrMode::Simplified ? lambda_s_fbtr : lambda_fbtr;
  }
};

/// Maps a threshold stated as a raw cosine score onto the (1 + cos) / 2
/// similarity scale used by the reconnection stage.
inline double from_cosine(double cosine) { return 0.5 * (1.0 + cosine); }

/// Defaults with the reconnection thresholds read as cosine scores
/// (0.5 and 0.7), the profile the synthetic benchmark runs with.
Config cosine_profile();

std::string_view to_string(FbtrMode mode);
std::string_view to_string(PredictorKind kind);
std::string_view to_string(CandidatePolicy policy);

// Parsers accept the CLI spellings ("off|simplified|rank",
// "static|cv|kalman", "exclude|rank") and throw std::invalid_argument.
FbtrMode parse_fbtr_mode(std::string_view text);
PredictorKind parse_predictor(std::string_view text);
CandidatePolicy parse_candidate_policy(std::string_view text);

}  // namespace lttrack
