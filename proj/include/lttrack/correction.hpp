#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lttrack/reconnect.hpp"
#include "lttrack/types.hpp"

namespace lttrack::correction {

using reconnect::JoinPair;

enum class JoinStatus {
  Applied,
  UnknownAbsorbed,  // no detection currently carries the absorbed id
  Redundant,        // both ids already resolve to the same track
};

std::string_view to_string(JoinStatus status);

struct RecordEntry {
  DetId det{};
  FrameIndex frame = 0;
  TrackId emitted{};    // id handed out when the detection was processed
  TrackId corrected{};  // id after every join applied so far
};

/// Assignment history with retroactive relabeling.
///
/// Joins are kept in a union-find over track ids, so a join costs
/// near-constant time and corrected ids are resolved when read.
class TrackRecord {
 public:
  /// Records the emission-time id of `det`. Throws std::invalid_argument on
  /// a repeated detection id and std::logic_error when `id` was already
  /// absorbed by an earlier join.
  void emit(DetId det, FrameIndex frame, TrackId id);

  /// Relabels every detection currently carrying `pair.absorbed`.
  JoinStatus apply_join(const JoinPair& pair);

  /// Current id of the track that `id` was merged into (itself if never
  /// absorbed).
  TrackId resolve(TrackId id) const;

  std::optional<TrackId> emitted(DetId det) const;
  std::optional<TrackId> corrected(DetId det) const;

  /// Detections currently labeled `id` (after resolution).
  std::size_t count(TrackId id) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<JoinPair>& joins() const { return joins_; }

  /// Snapshot in emission order.
  std::vector<RecordEntry> entries() const;

 private:
  struct Entry {
    DetId det;
    FrameIndex frame;
    TrackId emitted;
  };

  std::vector<Entry> entries_;
  std::unordered_map<std::int64_t, std::size_t> index_;       // det -> entries_ slot
  mutable std::unordered_map<std::int64_t, std::int64_t> parent_;  // absorbed -> surviving
  std::unordered_map<std::int64_t, std::size_t> counts_;       // root -> detections
  std::vector<JoinPair> joins_;
};

/// Reference implementation that rewrites labels in place: each join walks
/// the absorbed track's detections, O(n) in their number.
class EagerTrackRecord {
 public:
  void emit(DetId det, FrameIndex frame, TrackId id);
  JoinStatus apply_join(const JoinPair& pair);
  std::optional<TrackId> current(DetId det) const;
  std::size_t size() const { return labels_.size(); }

 private:
  std::unordered_map<std::int64_t, std::int64_t> labels_;                   // det -> id
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> members_;     // id -> dets
  std::unordered_map<std::int64_t, std::int64_t> absorbed_into_;
};

}  // namespace lttrack::correction
