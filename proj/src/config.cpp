#include "lttrack/config.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lttrack {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
}

void check_bounds(const QualityBounds& b, const char* name) {
  require(std::isfinite(b.min_confidence) && std::isfinite(b.max_abs_angle) &&
              std::isfinite(b.min_sharpness),
          name);
  require(b.max_abs_angle >= 0.0, name);
}

}  // namespace

void Config::validate() const {
  require(std::isfinite(lambda_iou) && lambda_iou >= 0.0 && lambda_iou <= 1.0,
          "lambda_iou must lie in [0, 1]");
  require(lambda_fbtr >= 0.0 && lambda_fbtr <= 1.0, "lambda_fbtr must lie in [0, 1]");
  require(lambda_s_fbtr >= 0.0 && lambda_s_fbtr <= 1.0,
          "lambda_s_fbtr must lie in [0, 1]");
  require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
  require(rank_window >= 1, "rank_window must be >= 1");
  require(max_coast >= 1, "max_coast must be >= 1");
  check_bounds(enroll, "enroll bounds must be finite");
  check_bounds(verify, "verify bounds must be finite");
  require(kalman.process >= 0.0 && kalman.measurement >= 0.0,
          "kalman noise scales must be non-negative");
  require(!cm_enabled || fbtr_mode != FbtrMode::Off,
          "correction requires reconnection (fbtr_mode != off)");
}

Config cosine_profile() {
  Config cfg;
  cfg.lambda_fbtr = from_cosine(0.5);
  cfg.lambda_s_fbtr = from_cosine(0.7);
  return cfg;
}

std::string_view to_string(FbtrMode mode) {
  switch (mode) {
    case FbtrMode::Off: return "off";
    case FbtrMode::Simplified: return "simplified";
    case FbtrMode::RankBased: return "rank";
  }
  return "?";
}

std::string_view to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::Static: return "static";
    case PredictorKind::ConstantVelocity: return "cv";
    case PredictorKind::KalmanCV: return "kalman";
  }
  return "?";
}

std::string_view to_string(CandidatePolicy policy) {
  switch (policy) {
    case CandidatePolicy::ExcludeBusy: return "exclude";
    case CandidatePolicy::RankBusy: return "rank";
  }
  return "?";
}

FbtrMode parse_fbtr_mode(std::string_view text) {
  if (text == "off") return FbtrMode::Off;
  if (text == "simplified") return FbtrMode::Simplified;
  if (text == "rank") return FbtrMode::RankBased;
  throw std::invalid_argument("unknown fbtr mode '" + std::string(text) + "'");
}

PredictorKind parse_predictor(std::string_view text) {
  if (text == "static") return PredictorKind::Static;
  if (text == "cv") return PredictorKind::ConstantVelocity;
  if (text == "kalman") return PredictorKind::KalmanCV;
  throw std::invalid_argument("unknown predictor '" + std::string(text) + "'");
}

CandidatePolicy parse_candidate_policy(std::string_view text) {
  if (text == "exclude") return CandidatePolicy::ExcludeBusy;
  if (text == "rank") return CandidatePolicy::RankBusy;
  throw std::invalid_argument("unknown candidate policy '" + std::string(text) + "'");
}

}  // namespace lttrack
