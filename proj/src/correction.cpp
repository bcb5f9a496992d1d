#include "lttrack/correction.hpp"

#include <stdexcept>
#include <string>

namespace lttrack::correction {

std::string_view to_string(JoinStatus status) {
  switch (status) {
    case JoinStatus::Applied: return "applied";
    case JoinStatus::UnknownAbsorbed: return "unknown_absorbed";
    case JoinStatus::Redundant: return "redundant";
  }
  return "?";
}

void TrackRecord::emit(DetId det, FrameIndex frame, TrackId id) {
  const auto key = to_int(det);
  if (index_.count(key) != 0) {
    throw std::invalid_argument("detection " + std::to_string(key) + " emitted twice");
  }
  if (parent_.count(to_int(id)) != 0) {
    throw std::logic_error("track " + std::to_string(to_int(id)) + " was already absorbed");
  }
  index_.emplace(key, entries_.size());
  entries_.push_back(Entry{det, frame, id});
  ++counts_[to_int(id)];
}

TrackId TrackRecord::resolve(TrackId id) const {
  std::int64_t root = to_int(id);
  for (auto it = parent_.find(root); it != parent_.end(); it = parent_.find(root)) {
    root = it->second;
  }
  // Path compression.
  std::int64_t node = to_int(id);
  for (auto it = parent_.find(node); it != parent_.end() && it->second != root;
       it = parent_.find(node)) {
    node = it->second;
    it->second = root;
  }
  return TrackId{root};
}

JoinStatus TrackRecord::apply_join(const JoinPair& pair) {
  const auto absorbed = to_int(pair.absorbed);
  if (parent_.count(absorbed) != 0) {
    // Already relabeled: nothing carries this id any more.
    return resolve(pair.absorbed) == resolve(pair.surviving) ? JoinStatus::Redundant
                                                              : JoinStatus::UnknownAbsorbed;
  }
  const auto target = to_int(resolve(pair.surviving));
  if (target == absorbed) return JoinStatus::Redundant;
  auto it = counts_.find(absorbed);
  if (it == counts_.end() || it->second == 0) return JoinStatus::UnknownAbsorbed;

  parent_[absorbed] = target;
  counts_[target] += it->second;
  counts_.erase(absorbed);
  joins_.push_back(pair);
  return JoinStatus::Applied;
}

std::optional<TrackId> TrackRecord::emitted(DetId det) const {
  auto it = index_.find(to_int(det));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].emitted;
}

std::optional<TrackId> TrackRecord::corrected(DetId det) const {
  auto id = emitted(det);
  if (!id) return std::nullopt;
  return resolve(*id);
}

std::size_t TrackRecord::count(TrackId id) const {
  if (parent_.count(to_int(id)) != 0) return 0;
  auto it = counts_.find(to_int(id));
  return it == counts_.end() ? 0 : it->second;
}

std::vector<RecordEntry> TrackRecord::entries() const {
  std::vector<RecordEntry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(RecordEntry{e.det, e.frame, e.emitted, resolve(e.emitted)});
  return out;
}

// ---------------------------------------------------------------------------

void EagerTrackRecord::emit(DetId det, FrameIndex /*frame*/, TrackId id) {
  const auto key = to_int(det);
  if (labels_.count(key) != 0) {
    throw std::invalid_argument("detection " + std::to_string(key) + " emitted twice");
  }
  labels_.emplace(key, to_int(id));
  members_[to_int(id)].push_back(key);
}

JoinStatus EagerTrackRecord::apply_join(const JoinPair& pair) {
  auto follow = [this](std::int64_t id) {
    for (auto it = absorbed_into_.find(id); it != absorbed_into_.end(); it = absorbed_into_.find(id)) {
      id = it->second;
    }
    return id;
  };
  const std::int64_t target = follow(to_int(pair.surviving));
  const auto absorbed = to_int(pair.absorbed);
  if (absorbed_into_.count(absorbed) != 0) {
    return follow(absorbed) == target ? JoinStatus::Redundant : JoinStatus::UnknownAbsorbed;
  }
  if (absorbed == target) return JoinStatus::Redundant;
  auto it = members_.find(absorbed);
  if (it == members_.end() || it->second.empty()) return JoinStatus::UnknownAbsorbed;
  auto& dest = members_[target];
  for (auto det : it->second) {
    labels_[det] = target;
    dest.push_back(det);
  }
  members_.erase(absorbed);
  absorbed_into_[absorbed] = target;
  return JoinStatus::Applied;
}

std::optional<TrackId> EagerTrackRecord::current(DetId det) const {
  auto it = labels_.find(to_int(det));
  if (it == labels_.end()) return std::nullopt;
  return TrackId{it->second};
}

}  // namespace lttrack::correction
