#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "lttrack/types.hpp"

namespace lttrack::metrics {

inline constexpr int kCrpPoints = 100;

/// One ground-truth detection and the track id the pipeline gave it
/// (nullopt when the pipeline dropped it).
struct EvalRecord {
  DetId det{};
  FrameIndex frame = 0;
  std::int64_t gt_id = 0;
  std::optional<TrackId> track;
};

struct MismatchCounts {
  std::int64_t smme = 0;  // switch to a track id never seen before
  std::int64_t hmme = 0;  // switch to a track id already used
};

struct EvalReport {
  std::int64_t smme_count = 0;
  std::int64_t hmme_count = 0;
  std::int64_t num_dets = 0;
  std::int64_t num_ids = 0;
  double frag = 0.0;
  double idsw = 0.0;
  double crs = 0.0;
  std::array<double, kCrpPoints> crp{};  // crp[X-1] = CR_X
};

/// Single-pass evaluator; records must arrive in non-decreasing frame order.
class Evaluator {
 public:
  /// Throws std::invalid_argument when the frame order is violated.
  void add(const EvalRecord& record);

  MismatchCounts mismatches() const { return counts_; }
  std::array<double, kCrpPoints> completion_rates() const;
  /// Fraction of each identity's detections held by its majority track.
  std::map<std::int64_t, double> completions() const;
  /// Throws std::invalid_argument when no record was added.
  EvalReport report() const;

 private:
  struct Identity {
    std::optional<TrackId> current;
    std::map<TrackId, std::int64_t> per_track;
    std::int64_t total = 0;
    std::int64_t best() const;
  };

  std::map<std::int64_t, Identity> ids_;
  std::set<TrackId> seen_;
  MismatchCounts counts_;
  std::int64_t num_dets_ = 0;
  std::optional<FrameIndex> last_frame_;
};

MismatchCounts count_mismatches(std::span<const EvalRecord> input);
std::array<double, kCrpPoints> completion_rates(std::span<const EvalRecord> input);
EvalReport evaluate(std::span<const EvalRecord> input);

}  // namespace lttrack::metrics
