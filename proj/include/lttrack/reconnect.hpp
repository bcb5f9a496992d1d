#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lttrack/config.hpp"
#include "lttrack/tracklet.hpp"
#include "lttrack/types.hpp"

namespace lttrack::reconnect {

/// Face similarity mapped to [0, 1]: (1 + cos) / 2.
double similarity(const Embedding& a, const Embedding& b);

/// Normalized mean of `templates`. Throws std::invalid_argument when empty and
/// DegenerateTemplate when the mean has zero norm.
Embedding reference_template(std::span<const Embedding> templates);

/// Reference templates (normalized mean of enrollables) of every tracklet
/// that owns at least one enrollable template.
class Gallery {
 public:
  void add(TrackId id, const Embedding& enrollable);
  /// Moves the templates of `absorbed` onto `surviving`.
  void absorb(TrackId absorbed, TrackId surviving);
  void erase(TrackId id);

  bool contains(TrackId id) const { return entries_.count(id) != 0; }
  std::size_t size() const { return entries_.size(); }
  std::size_t template_count(TrackId id) const;
  bool dirty(TrackId id) const;

  /// Cached reference template, recomputed after an insertion.
  const Embedding& reference(TrackId id) const;

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [id, entry] : entries_) f(id, reference(id));
  }

 private:
  struct Entry {
    EmbeddingSum sum;
    mutable std::optional<Embedding> cached;
  };
  const Entry& entry(TrackId id) const;

  std::map<TrackId, Entry> entries_;
};

struct Candidate {
  TrackId id{};
  double similarity = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Gallery tracklets other than those rejected by `skip`, by descending
/// similarity to `query`; equal similarities keep the older (smaller) id
/// first. Element r-1 is the rank-r candidate.
std::vector<Candidate> rank_candidates(const Embedding& query, const Gallery& gallery,
                                       const std::function<bool(TrackId)>& skip);
std::vector<Candidate> rank_candidates(const Embedding& query, const Gallery& gallery,
                                       TrackId exclude);

/// Rank-margin test: the best similarity must reach 1/epsilon times the mean
/// of the next `window` similarities. With fewer competitors the available
/// ones are averaged; with none the test passes.
bool check_rank_margin(std::span<const double> sims_descending, double epsilon, int window);
bool check_rank_margin(std::span<const Candidate> ranked, double epsilon, int window);

enum class Outcome { Fused, RejectedThreshold, RejectedRankMargin, RejectedBusyTarget, NoCandidates };

std::string_view to_string(Outcome outcome);

struct ReconnectionDecision {
  TrackId query{};
  std::vector<Candidate> ranked;
  Outcome outcome = Outcome::NoCandidates;
  std::optional<TrackId> target;  // set iff outcome == Fused
};

struct JoinPair {
  TrackId absorbed{};
  TrackId surviving{};
  FrameIndex frame = 0;

  friend bool operator==(const JoinPair&, const JoinPair&) = default;
};

/// Predicate for tracklets that already own a detection in the current frame.
using BusyPredicate = std::function<bool(TrackId)>;

/// Decides whether the tracklet `query_id`, whose verifiable templates
/// average to `query_mean`, should be fused into its best-ranked gallery
/// candidate. Pure: the gallery is not modified.
///
/// Throws std::invalid_argument when `cfg.fbtr_mode` is Off.
ReconnectionDecision try_reconnect(TrackId query_id, const Embedding& query_mean,
                                   const Gallery& gallery, const Config& cfg,
                                   const BusyPredicate& busy = {});

/// Same, with the query mean taken over `t_k.verifiables`.
ReconnectionDecision try_reconnect(const Tracklet& t_k, const Gallery& gallery,
                                   const Config& cfg, const BusyPredicate& busy = {});

/// Applies a fusion decision: detections and templates of `absorbed` move to
/// `surviving`, which takes over the absorbed tracklet's live state
/// (predictor, status, last box). `absorbed` is left Dead and empty.
JoinPair fuse(Tracklet& absorbed, Tracklet& surviving, Gallery& gallery, FrameIndex frame);

}  // namespace lttrack::reconnect
