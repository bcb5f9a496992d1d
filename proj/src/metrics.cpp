#include "lttrack/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lttrack::metrics {

std::int64_t Evaluator::Identity::best() const {
  std::int64_t b = 0;
  for (const auto& [track, n] : per_track) b = std::max(b, n);
  return b;
}

void Evaluator::add(const EvalRecord& r) {
  if (last_frame_ && r.frame < *last_frame_) {
    throw std::invalid_argument("evaluation records out of frame order at detection " +
                                std::to_string(to_int(r.det)));
  }
  last_frame_ = r.frame;
  ++num_dets_;

  Identity& g = ids_[r.gt_id];
  ++g.total;
  if (!r.track) return;

  const TrackId t = *r.track;
  ++g.per_track[t];
  if (g.current && *g.current != t) {
    if (seen_.count(t) != 0) {
      ++counts_.hmme;
    } else {
      ++counts_.smme;
    }
  }
  g.current = t;
  seen_.insert(t);
}

std::array<double, kCrpPoints> Evaluator::completion_rates() const {
  std::array<double, kCrpPoints> crp{};
  if (ids_.empty()) return crp;
  for (int x = 1; x <= kCrpPoints; ++x) {
    std::int64_t covered = 0;
    for (const auto& [gt, g] : ids_) {
      // best/total >= x/100, kept in integers to avoid rounding at the edges.
      if (g.best() * kCrpPoints >= x * g.total) ++covered;
    }
    crp[static_cast<std::size_t>(x - 1)] =
        static_cast<double>(covered) / static_cast<double>(ids_.size());
  }
  return crp;
}

std::map<std::int64_t, double> Evaluator::completions() const {
  std::map<std::int64_t, double> out;
  for (const auto& [gt, g] : ids_) {
    out[gt] = static_cast<double>(g.best()) / static_cast<double>(g.total);
  }
  return out;
}

EvalReport Evaluator::report() const {
  if (num_dets_ == 0) throw std::invalid_argument("evaluation input is empty");
  EvalReport rep;
  rep.smme_count = counts_.smme;
  rep.hmme_count = counts_.hmme;
  rep.num_dets = num_dets_;
  rep.num_ids = static_cast<std::int64_t>(ids_.size());
  rep.frag = static_cast<double>(counts_.smme) / static_cast<double>(num_dets_);
  rep.idsw = static_cast<double>(counts_.hmme) / static_cast<double>(num_dets_);
  rep.crp = completion_rates();
  rep.crs = std::accumulate(rep.crp.begin(), rep.crp.end(), 0.0) / kCrpPoints;
  return rep;
}

MismatchCounts count_mismatches(std::span<const EvalRecord> input) {
  Evaluator ev;
  for (const auto& r : input) ev.add(r);
  return ev.mismatches();
}

std::array<double, kCrpPoints> completion_rates(std::span<const EvalRecord> input) {
  if (input.empty()) throw std::invalid_argument("completion_rates: no identities");
  Evaluator ev;
  for (const auto& r : input) ev.add(r);
  return ev.completion_rates();
}

EvalReport evaluate(std::span<const EvalRecord> input) {
  Evaluator ev;
  for (const auto& r : input) ev.add(r);
  return ev.report();
}

}  // namespace lttrack::metrics
