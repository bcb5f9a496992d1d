#include "lttrack/reconnect.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <string>

namespace lttrack::reconnect {

double similarity(const Embedding& a, const Embedding& b) {
  return std::clamp(0.5 * (1.0 + a.dot(b)), 0.0, 1.0);
}

Embedding reference_template(std::span<const Embedding> templates) {
  if (templates.empty()) throw std::invalid_argument("reference_template: no templates");
  EmbeddingSum sum(templates.front().dim());
  for (const auto& t : templates) sum.add(t);
  return sum.mean();
}

// ---------------------------------------------------------------------------

void Gallery::add(TrackId id, const Embedding& enrollable) {
  auto& e = entries_[id];
  e.sum.add(enrollable);
  e.cached.reset();
}

void Gallery::absorb(TrackId absorbed, TrackId surviving) {
  if (absorbed == surviving) return;
  auto it = entries_.find(absorbed);
  if (it == entries_.end()) return;
  auto& target = entries_[surviving];
  target.sum.add(it->second.sum);
  target.cached.reset();
  entries_.erase(it);
}

void Gallery::erase(TrackId id) { entries_.erase(id); }

const Gallery::Entry& Gallery::entry(TrackId id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw std::out_of_range("gallery has no tracklet " + std::to_string(to_int(id)));
  }
  return it->second;
}

std::size_t Gallery::template_count(TrackId id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second.sum.count();
}

bool Gallery::dirty(TrackId id) const { return !entry(id).cached.has_value(); }

const Embedding& Gallery::reference(TrackId id) const {
  const Entry& e = entry(id);
  if (!e.cached) e.cached.emplace(e.sum.mean());
  return *e.cached;
}

// ---------------------------------------------------------------------------

std::vector<Candidate> rank_candidates(const Embedding& query, const Gallery& gallery,
                                       const std::function<bool(TrackId)>& skip) {
  std::vector<Candidate> ranked;
  ranked.reserve(gallery.size());
  gallery.for_each([&](TrackId id, const Embedding& ref) {
    if (skip && skip(id)) return;
    ranked.push_back(Candidate{id, similarity(query, ref)});
  });
  std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  });
  return ranked;
}

std::vector<Candidate> rank_candidates(const Embedding& query, const Gallery& gallery,
                                       TrackId exclude) {
  return rank_candidates(query, gallery, [exclude](TrackId id) { return id == exclude; });
}

bool check_rank_margin(std::span<const double> sims, double epsilon, int window) {
  if (sims.empty()) throw std::invalid_argument("check_rank_margin: empty ranking");
  if (!(epsilon > 0.0)) throw std::invalid_argument("check_rank_margin: epsilon must be > 0");
  if (window < 1) throw std::invalid_argument("check_rank_margin: window must be >= 1");
  const std::size_t competitors =
      std::min(static_cast<std::size_t>(window), sims.size() - 1);
  if (competitors == 0) return true;
  double sum = 0.0;
  for (std::size_t r = 1; r <= competitors; ++r) sum += sims[r];
  const double mean = sum / static_cast<double>(competitors);
  return sims[0] >= (1.0 / epsilon) * mean;
}

bool check_rank_margin(std::span<const Candidate> ranked, double epsilon, int window) {
  std::vector<double> sims;
  const std::size_t keep = std::min(ranked.size(), static_cast<std::size_t>(window) + 1);
  sims.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) sims.push_back(ranked[i].similarity);
  return check_rank_margin(std::span<const double>(sims), epsilon, window);
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Fused: return "fused";
    case Outcome::RejectedThreshold: return "rejected_threshold";
    case Outcome::RejectedRankMargin: return "rejected_rank_margin";
    case Outcome::RejectedBusyTarget: return "rejected_busy_target";
    case Outcome::NoCandidates: return "no_candidates";
  }
  return "?";
}

ReconnectionDecision try_reconnect(TrackId query_id, const Embedding& query_mean,
                                   const Gallery& gallery, const Config& cfg,
                                   const BusyPredicate& busy) {
  if (cfg.fbtr_mode == FbtrMode::Off) {
    throw std::invalid_argument("try_reconnect: reconnection is disabled");
  }
  const bool exclude_busy = cfg.candidate_policy == CandidatePolicy::ExcludeBusy;
  ReconnectionDecision d;
  d.query = query_id;
  d.ranked = rank_candidates(query_mean, gallery, [&](TrackId id) {
    if (id == query_id) return true;
    return exclude_busy && busy && busy(id);
  });
  if (d.ranked.empty()) {
    d.outcome = Outcome::NoCandidates;
    return d;
  }
  const Candidate& top = d.ranked.front();
  if (top.similarity < cfg.fusion_threshold()) {
    d.outcome = Outcome::RejectedThreshold;
    return d;
  }
  if (cfg.fbtr_mode == FbtrMode::RankBased &&
      !check_rank_margin(std::span<const Candidate>(d.ranked), cfg.epsilon, cfg.rank_window)) {
    d.outcome = Outcome::RejectedRankMargin;
    return d;
  }
  if (busy && busy(top.id)) {
    d.outcome = Outcome::RejectedBusyTarget;
    return d;
  }
  d.outcome = Outcome::Fused;
  d.target = top.id;
  return d;
}

ReconnectionDecision try_reconnect(const Tracklet& t_k, const Gallery& gallery,
                                   const Config& cfg, const BusyPredicate& busy) {
  return try_reconnect(t_k.id, reference_template(t_k.verifiables), gallery, cfg, busy);
}

JoinPair fuse(Tracklet& absorbed, Tracklet& surviving, Gallery& gallery, FrameIndex frame) {
  if (absorbed.id == surviving.id) throw std::invalid_argument("fuse: tracklet fused with itself");

  std::vector<TrackPoint> merged;
  merged.reserve(absorbed.detections.size() + surviving.detections.size());
  std::merge(surviving.detections.begin(), surviving.detections.end(),
             absorbed.detections.begin(), absorbed.detections.end(), std::back_inserter(merged));
  surviving.detections = std::move(merged);

  std::move(absorbed.enrollables.begin(), absorbed.enrollables.end(),
            std::back_inserter(surviving.enrollables));
  std::move(absorbed.verifiables.begin(), absorbed.verifiables.end(),
            std::back_inserter(surviving.verifiables));
  surviving.verifiable_sum.add(absorbed.verifiable_sum);
  gallery.absorb(absorbed.id, surviving.id);

  surviving.status = absorbed.status;
  surviving.coast_count = absorbed.coast_count;
  surviving.last_update_frame = absorbed.last_update_frame;
  surviving.last_box = absorbed.last_box;
  surviving.predictor = absorbed.predictor;

  absorbed.detections.clear();
  absorbed.enrollables.clear();
  absorbed.verifiables.clear();
  absorbed.verifiable_sum = EmbeddingSum(surviving.verifiable_sum.dim());
  absorbed.status = TrackStatus::Dead;

  return JoinPair{absorbed.id, surviving.id, frame};
}

}  // namespace lttrack::reconnect
