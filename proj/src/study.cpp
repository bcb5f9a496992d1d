#include "lttrack/study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lttrack/reconnect.hpp"
#include "lttrack/rng.hpp"
#include "lttrack/sim.hpp"

namespace lttrack::study {

using sim::Rng;

bool DbTracklet::pure() const {
  return std::all_of(sources.begin(), sources.end(),
                     [&](std::int64_t s) { return s == sources.front(); });
}

namespace {

// Template stream whose noise follows an AR(1) process, so neighbouring
// templates look alike and a short slice does not average the noise away.
std::vector<Embedding> correlated_stream(const Embedding& latent, int count, double sigma, double rho,
                                         Rng& rng) {
  const std::size_t dim = latent.dim();
  const double scale = sigma / std::sqrt(static_cast<double>(dim));
  const double innovation = std::sqrt(1.0 - rho * rho);
  std::vector<double> noise(dim);
  for (auto& n : noise) n = rng.normal();
  std::vector<Embedding> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<double> v(dim);
  for (int t = 0; t < count; ++t) {
    if (t > 0) {
      for (auto& n : noise) n = rho * n + innovation * rng.normal();
    }
    for (std::size_t i = 0; i < dim; ++i) v[i] = latent.values()[i] + scale * noise[i];
    out.emplace_back(std::span<const double>(v));
  }
  return out;
}

Embedding slice_mean(std::span<const Embedding> a, std::span<const Embedding> b = {}) {
  EmbeddingSum sum(a.front().dim());
  for (const auto& e : a) sum.add(e);
  for (const auto& e : b) sum.add(e);
  return sum.mean();
}

}  // namespace

std::vector<TemplateSet> make_identities(int count, int templates, std::uint64_t seed, std::size_t dim,
                                         const IdentityModel& model) {
  if (count < 0 || templates < 1) throw std::invalid_argument("make_identities: bad sizes");
  std::vector<TemplateSet> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    const Embedding latent = sim::random_unit(rng, dim);
    const double difficulty = std::exp(model.difficulty_spread * rng.normal());
    TemplateSet t;
    t.id = i + 1;
    t.enrollables = correlated_stream(latent, templates, model.enroll_sigma * difficulty,
                                      model.correlation, rng);
    t.verifiables = correlated_stream(latent, templates, model.verify_sigma * difficulty,
                                      model.correlation, rng);
    out.push_back(std::move(t));
  }
  return out;
}

Database pure_db(std::span<const TemplateSet> identities) {
  Database db;
  db.reserve(identities.size());
  for (const auto& ident : identities) {
    if (ident.enrollables.empty()) {
      throw std::invalid_argument("pure_db: identity " + std::to_string(ident.id) + " has no templates");
    }
    db.push_back(DbTracklet{ident.id, ident.enrollables,
                            std::vector<std::int64_t>(ident.enrollables.size(), ident.id)});
  }
  return db;
}

Database mixed_identity_db(const Database& pure, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("mixed_identity_db: fraction out of [0, 1]");
  const auto pairs = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(pure.size()) / 2.0));
  Database db = pure;
  if (pairs == 0) return db;
  if (2 * pairs > pure.size()) throw std::invalid_argument("mixed_identity_db: not enough tracklets");

  std::vector<std::size_t> order(pure.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::int64_t next_id = 0;
  for (const auto& t : pure) next_id = std::max(next_id, t.id);
  for (std::size_t p = 0; p < pairs; ++p) {
    DbTracklet mixed;
    mixed.id = ++next_id;
    for (std::size_t side = 0; side < 2; ++side) {
      DbTracklet& src = db[order[2 * p + side]];
      if (!src.pure()) throw std::invalid_argument("mixed_identity_db: source is not pure");
      if (src.templates.size() <= static_cast<std::size_t>(kSliceLength)) {
        throw std::invalid_argument("mixed_identity_db: tracklet " + std::to_string(src.id) +
                                    " has too few templates to give a slice");
      }
      const auto start = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(src.templates.size()) - kSliceLength));
      const auto first = src.templates.begin() + static_cast<std::ptrdiff_t>(start);
      const auto last = first + kSliceLength;
      mixed.templates.insert(mixed.templates.end(), first, last);
      mixed.sources.insert(mixed.sources.end(), kSliceLength, src.sources.front());
      src.templates.erase(first, last);
      src.sources.erase(src.sources.begin() + static_cast<std::ptrdiff_t>(start),
                        src.sources.begin() + static_cast<std::ptrdiff_t>(start) + kSliceLength);
    }
    db.push_back(std::move(mixed));
  }
  return db;
}

double epsilon_star(std::span<const double> sims, int window) {
  if (window < 1) throw std::invalid_argument("epsilon_star: window must be >= 1");
  if (sims.size() < static_cast<std::size_t>(window) + 1) {
    throw std::invalid_argument("epsilon_star: needs window + 1 similarities");
  }
  if (sims[0] <= 0.0) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int r = 1; r <= window; ++r) sum += sims[static_cast<std::size_t>(r)];
  return (sum / static_cast<double>(window)) / sims[0];
}

QueryOutcome rank_query(const Embedding& query, std::span<const Embedding> refs, std::size_t keep) {
  std::vector<std::pair<double, std::int64_t>> sims;
  sims.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    sims.emplace_back(reconnect::similarity(query, refs[i]), static_cast<std::int64_t>(i));
  }
  keep = std::min(keep, sims.size());
  std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(keep), sims.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  QueryOutcome out;
  out.top.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.top.push_back(sims[i].first);
  out.rank1 = keep > 0 ? sims.front().second : -1;
  return out;
}

std::pair<double, std::int64_t> epsilon_for_query(const Embedding& query, std::span<const Embedding> refs,
                                                  int window) {
  if (window < 1 || refs.size() < static_cast<std::size_t>(window) + 1) {
    throw std::invalid_argument("epsilon_for_query: gallery smaller than window + 1");
  }
  const auto ranked = rank_query(query, refs, static_cast<std::size_t>(window) + 1);
  return {epsilon_star(ranked.top, window), ranked.rank1};
}

std::string_view to_string(QueryClass c) {
  switch (c) {
    case QueryClass::CorrectReconnection: return "correct_reconnection";
    case QueryClass::WrongReconnection: return "wrong_reconnection";
    case QueryClass::IdSwitch: return "id_switch";
  }
  return "?";
}

double StudyResult::filtered_pct(int window, int mix_percent, QueryClass cls, double epsilon,
                                 std::optional<int> rep) const {
  std::int64_t total = 0;
  std::int64_t filtered = 0;
  for (const auto& s : samples) {
    if (s.window != window || s.mix_percent != mix_percent || s.cls != cls) continue;
    if (rep && s.rep != *rep) continue;
    ++total;
    if (s.epsilon > epsilon) ++filtered;
  }
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(filtered) / static_cast<double>(total);
}

std::int64_t StudyResult::count(int window, int mix_percent, QueryClass cls, std::optional<int> rep) const {
  std::int64_t total = 0;
  for (const auto& s : samples) {
    if (s.window == window && s.mix_percent == mix_percent && s.cls == cls && (!rep || s.rep == *rep)) {
      ++total;
    }
  }
  return total;
}

StudyResult run_study(const StudyConfig& cfg, std::span<const TemplateSet> identities) {
  if (cfg.c_min < 1 || cfg.c_max < cfg.c_min) throw std::invalid_argument("run_study: bad C range");
  if (cfg.reps < 1) throw std::invalid_argument("run_study: reps must be >= 1");

  std::vector<TemplateSet> generated;
  if (identities.empty()) {
    generated = make_identities(cfg.identities, cfg.templates, cfg.seed, cfg.dim, cfg.model);
    identities = generated;
  }
  if (identities.size() < 2) throw std::invalid_argument("run_study: need at least two identities");
  for (const auto& ident : identities) {
    if (ident.verifiables.size() < static_cast<std::size_t>(kSliceLength)) {
      throw std::invalid_argument("run_study: identity " + std::to_string(ident.id) +
                                  " has fewer than 5 verifiable templates");
    }
  }
  const Database pure = pure_db(identities);
  if (pure.size() < static_cast<std::size_t>(cfg.c_max) + 1) {
    throw std::invalid_argument("run_study: database smaller than C + 1");
  }

  StudyResult result;
  const auto keep = static_cast<std::size_t>(cfg.c_max) + 1;
  for (int mix : cfg.mix_levels) {
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const std::uint64_t run_seed =
          Rng::splitmix64(cfg.seed ^ Rng::splitmix64(static_cast<std::uint64_t>(mix) * 1000 + rep));
      const Database db = mixed_identity_db(pure, mix / 100.0, run_seed);
      std::vector<Embedding> refs;
      refs.reserve(db.size());
      for (const auto& t : db) refs.push_back(slice_mean(t.templates));

      Rng rng(run_seed ^ 0x71756572ULL);
      const auto n = static_cast<std::int64_t>(identities.size());
      for (std::int64_t i = 0; i < n; ++i) {
        const TemplateSet& ident = identities[static_cast<std::size_t>(i)];
        std::span<const Embedding> ver(ident.verifiables);
        const auto max_start = static_cast<std::int64_t>(ver.size()) - kSliceLength;

        // A returning face: a short run of verifiable templates.
        const auto s = static_cast<std::size_t>(rng.uniform_int(0, max_start));
        const auto reco = rank_query(slice_mean(ver.subspan(s, kSliceLength)), refs, keep);
        const DbTracklet& top = db[static_cast<std::size_t>(reco.rank1)];
        const bool correct = top.pure() && top.sources.front() == ident.id;

        // A tracklet that switched identity halfway.
        std::int64_t j = rng.uniform_int(0, n - 2);
        if (j >= i) ++j;
        const TemplateSet& other = identities[static_cast<std::size_t>(j)];
        std::span<const Embedding> ver2(other.verifiables);
        const auto s2 = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(ver2.size()) - kSliceLength));
        const auto swap = rank_query(
            slice_mean(ver.subspan(s, kSliceLength), ver2.subspan(s2, kSliceLength)), refs, keep);

        for (int c = cfg.c_min; c <= cfg.c_max; ++c) {
          result.samples.push_back(Sample{c, mix, rep,
                                          correct ? QueryClass::CorrectReconnection
                                                  : QueryClass::WrongReconnection,
                                          epsilon_star(reco.top, c)});
          result.samples.push_back(Sample{c, mix, rep, QueryClass::IdSwitch, epsilon_star(swap.top, c)});
        }
      }
    }
  }
  return result;
}

}  // namespace lttrack::study
