#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lttrack/types.hpp"

namespace lttrack::study {

/// A stored tracklet of a study database. `sources[i]` is the identity that
/// produced `templates[i]`; a pure tracklet has a single source.
struct DbTracklet {
  std::int64_t id = 0;
  std::vector<Embedding> templates;
  std::vector<std::int64_t> sources;

  bool pure() const;
};

using Database = std::vector<DbTracklet>;

struct IdentityModel {
  double enroll_sigma = 0.6;    // noise norm of enrollable templates, median identity
  double verify_sigma = 1.0;    // same for verifiable templates
  double difficulty_spread = 0.45;  // log-normal spread of per-identity noise
  double correlation = 0.85;    // AR(1) coefficient between consecutive templates
};

/// Identities with consecutive (temporally correlated) enrollable and
/// verifiable template streams, as a face track would produce.
std::vector<TemplateSet> make_identities(int count, int templates, std::uint64_t seed,
                                         std::size_t dim = 128, const IdentityModel& model = {});

/// One pure tracklet per identity, holding its enrollable templates.
Database pure_db(std::span<const TemplateSet> identities);

/// Moves slices of 5 consecutive templates out of random pairs of pure
/// tracklets into new mixed tracklets until `fraction` of the identities are
/// mixed. Template count is conserved. Throws std::invalid_argument when the
/// database cannot supply the pairs.
Database mixed_identity_db(const Database& pure, double fraction, std::uint64_t seed);

inline constexpr int kSliceLength = 5;

/// Smallest epsilon at which the rank-margin test passes: the mean of the
/// similarities at ranks 2..C+1 over the rank-1 similarity. Infinite when
/// the rank-1 similarity is zero. Needs at least C + 1 entries.
double epsilon_star(std::span<const double> sims_descending, int window);

struct QueryOutcome {
  std::vector<double> top;  // best similarities, descending
  std::int64_t rank1 = 0;   // index into the database
};

/// Ranks the reference templates (normalized means) of `refs` against
/// `query`, keeping the best `keep` similarities.
QueryOutcome rank_query(const Embedding& query, std::span<const Embedding> refs, std::size_t keep);

/// ε* of `query` against `refs` with window `window`, and the database index
/// of the rank-1 tracklet. Throws std::invalid_argument when fewer than
/// window + 1 references exist.
std::pair<double, std::int64_t> epsilon_for_query(const Embedding& query,
                                                  std::span<const Embedding> refs, int window);

enum class QueryClass { CorrectReconnection, WrongReconnection, IdSwitch };

std::string_view to_string(QueryClass c);

struct Sample {
  int window = 0;       // C
  int mix_percent = 0;
  int rep = 0;
  QueryClass cls = QueryClass::CorrectReconnection;
  double epsilon = 0.0;
};

struct StudyConfig {
  int identities = 200;
  int templates = 30;
  std::vector<int> mix_levels{0, 5, 10, 15, 20, 25};
  int c_min = 1;
  int c_max = 9;
  int reps = 10;
  std::uint64_t seed = 7;
  std::size_t dim = 128;
  IdentityModel model;
};

struct StudyResult {
  std::vector<Sample> samples;

  /// Percentage of the matching samples with ε* above `epsilon` (rejected by
  /// the rank-margin test at that ε). 0 when nothing matches.
  double filtered_pct(int window, int mix_percent, QueryClass cls, double epsilon,
                      std::optional<int> rep = std::nullopt) const;
  std::int64_t count(int window, int mix_percent, QueryClass cls,
                     std::optional<int> rep = std::nullopt) const;
};

/// Runs every (mix level, repetition) with one reconnection query and one
/// two-identity query per identity, recording ε* for each C in range.
/// `identities` replaces the generated population when non-empty.
StudyResult run_study(const StudyConfig& cfg, std::span<const TemplateSet> identities = {});

}  // namespace lttrack::study
