#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lttrack/metrics.hpp"
#include "lttrack/rng.hpp"
#include "lttrack/types.hpp"

namespace lttrack::sim {

/// Face center position at `frame`; positions between waypoints are
/// interpolated linearly and held before the first / after the last one.
struct Waypoint {
  FrameIndex frame = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Frames [start, end) during which an identity is in the scene.
struct PresenceWindow {
  FrameIndex start = 0;
  FrameIndex end = 0;
  std::vector<Waypoint> waypoints;
};

/// Best-case face quality of an identity (frontal, close, unoccluded).
struct QualityProfile {
  double confidence = 0.99;
  double sharpness = 0.97;
  double yaw = 0.0;  // degrees, added to the heading-derived yaw
  double pitch = 0.0;
};

struct IdentityScript {
  std::int64_t id = 0;
  PresenceWindow presence;
  std::vector<PresenceWindow> reentries;
  double face_height = 64.0;  // pixels at the bottom of the frame
  QualityProfile quality;
};

struct Occluder {
  BBox rect;
  FrameIndex start = 0;
  FrameIndex end = 0;  // exclusive
};

struct NoiseModel {
  double embedding_sigma = 0.35;  // norm of the noise relative to the unit latent
  double box_sigma = 1.0;         // pixels
  double miss_rate = 0.02;
};

/// Identities whose latent embeddings are pairwise at least
/// `min_similarity` apart on the (1 + cos) / 2 scale.
struct LatentGroup {
  std::vector<std::int64_t> members;
  double min_similarity = 0.8;
};

struct SceneScript {
  std::string name = "scene";
  std::uint64_t seed = 0;
  FrameIndex frame_count = 0;
  double frame_width = 1920.0;
  double frame_height = 1080.0;
  std::size_t dim = 128;
  NoiseModel noise;
  std::vector<IdentityScript> identities;
  std::vector<Occluder> occluders;
  std::vector<LatentGroup> latent_groups;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

struct GeneratedScene {
  std::vector<Detection> detections;  // sorted by frame
  /// Ground truth with every detection assigned to its own identity.
  std::vector<metrics::EvalRecord> truth;
  std::map<std::int64_t, Embedding> latents;
};

/// Deterministic in (script, script.seed).
GeneratedScene generate(const SceneScript& script);

/// Center of `identity` at `frame`, or false when it is not in the scene.
bool position_at(const IdentityScript& identity, FrameIndex frame, double& x, double& y);

/// Latent embeddings for every identity of `script`, honoring its groups.
std::map<std::int64_t, Embedding> make_latents(const SceneScript& script);

/// Uniformly distributed unit vector.
Embedding random_unit(Rng& rng, std::size_t dim);

/// normalize(latent + sigma * g / sqrt(dim)) with g standard normal.
Embedding perturb(const Embedding& latent, double sigma, Rng& rng);

inline constexpr std::int64_t kGhostIdBase = 1'000'000;

/// Distractor identities with ids kGhostIdBase + i and good-quality
/// templates: `per_ghost` enrollable and as many verifiable ones.
std::vector<TemplateSet> make_ghosts(int n, int per_ghost, std::uint64_t seed,
                                     std::size_t dim = 128, double sigma = 0.35);

/// Longest run of frames between consecutive detections of one identity.
FrameIndex max_gt_gap(const std::vector<Detection>& detections);

// ---------------------------------------------------------------------------
// Procedural scenes.

struct SceneRecipe {
  std::string name = "scene";
  std::uint64_t seed = 1;
  FrameIndex frame_count = 900;
  int identities = 8;
  int reentries = 0;     // identities that leave and come back once
  int pillars = 0;       // static full-height occluders
  int passing = 0;       // large transient occluders
  int confusable_groups = 0;
  int group_size = 3;
  double lateral = 0.0;  // yaw bias in degrees (side-on camera)
  double speed = 3.0;    // pixels per frame
  NoiseModel noise;
};

SceneScript make_scene(const SceneRecipe& recipe);

/// Fixed-seed scenes with re-entries, long occlusions, crowding and
/// side-on views, plus two control scenes without any gap.
std::vector<SceneRecipe> benchmark_recipes();
std::vector<SceneScript> benchmark_suite();

/// Scenes where groups of identities have highly similar faces.
std::vector<SceneScript> confusable_suite();

/// Two people; one is hidden by an occluder long enough for its tracklet to
/// die, then reappears and must be reconnected.
SceneScript correction_scene();

}  // namespace lttrack::sim
