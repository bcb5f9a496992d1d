#include "lttrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace lttrack::sim {

namespace {

constexpr double kMargin = 60.0;

void check(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("scene script: " + what);
}

bool inside(const BBox& r, double x, double y) {
  return x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h;
}

double overlap_fraction(const BBox& face, const BBox& occ) {
  const double ix = std::min(face.x + face.w, occ.x + occ.w) - std::max(face.x, occ.x);
  const double iy = std::min(face.y + face.h, occ.y + occ.h) - std::max(face.y, occ.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  return std::min(1.0, ix * iy / face.area());
}

void validate_window(const PresenceWindow& w, const std::string& who) {
  check(w.start >= 0 && w.start < w.end, who + ": window needs 0 <= start < end");
  check(!w.waypoints.empty(), who + ": window without waypoints");
  for (std::size_t i = 0; i < w.waypoints.size(); ++i) {
    const auto& p = w.waypoints[i];
    check(std::isfinite(p.x) && std::isfinite(p.y), who + ": non-finite waypoint");
    if (i > 0) check(p.frame > w.waypoints[i - 1].frame, who + ": waypoint frames must increase");
  }
}

bool interpolate(const PresenceWindow& w, FrameIndex frame, double& x, double& y) {
  if (frame < w.start || frame >= w.end) return false;
  const auto& pts = w.waypoints;
  if (frame <= pts.front().frame) {
    x = pts.front().x;
    y = pts.front().y;
    return true;
  }
  if (frame >= pts.back().frame) {
    x = pts.back().x;
    y = pts.back().y;
    return true;
  }
  auto hi = std::upper_bound(pts.begin(), pts.end(), frame,
                             [](FrameIndex f, const Waypoint& p) { return f < p.frame; });
  auto lo = std::prev(hi);
  const double t = static_cast<double>(frame - lo->frame) / static_cast<double>(hi->frame - lo->frame);
  x = lo->x + t * (hi->x - lo->x);
  y = lo->y + t * (hi->y - lo->y);
  return true;
}

const PresenceWindow* window_at(const IdentityScript& id, FrameIndex frame) {
  if (frame >= id.presence.start && frame < id.presence.end) return &id.presence;
  for (const auto& w : id.reentries) {
    if (frame >= w.start && frame < w.end) return &w;
  }
  return nullptr;
}

}  // namespace

void SceneScript::validate() const {
  check(frame_count > 0, "frame_count must be positive");
  check(frame_width > 0.0 && frame_height > 0.0, "frame size must be positive");
  check(dim >= 1, "dim must be >= 1");
  check(noise.embedding_sigma >= 0.0 && noise.box_sigma >= 0.0, "noise scales must be >= 0");
  check(noise.miss_rate >= 0.0 && noise.miss_rate < 1.0, "miss_rate must be in [0, 1)");

  std::set<std::int64_t> ids;
  for (const auto& ident : identities) {
    const std::string who = "identity " + std::to_string(ident.id);
    check(ids.insert(ident.id).second, who + " is duplicated");
    check(ident.face_height > 0.0, who + ": face_height must be positive");
    validate_window(ident.presence, who);
    std::vector<std::pair<FrameIndex, FrameIndex>> spans{{ident.presence.start, ident.presence.end}};
    for (const auto& w : ident.reentries) {
      validate_window(w, who);
      spans.emplace_back(w.start, w.end);
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      check(spans[i].first >= spans[i - 1].second, who + ": presence windows overlap");
    }
  }
  for (const auto& occ : occluders) {
    check(occ.rect.w > 0.0 && occ.rect.h > 0.0, "occluder with empty rectangle");
    check(occ.start < occ.end, "occluder needs start < end");
  }
  std::set<std::int64_t> grouped;
  for (const auto& g : latent_groups) {
    check(g.members.size() >= 2, "latent group needs two members");
    check(g.min_similarity > 0.0 && g.min_similarity < 1.0, "group similarity must be in (0, 1)");
    for (auto m : g.members) {
      check(ids.count(m) != 0, "latent group names unknown identity " + std::to_string(m));
      check(grouped.insert(m).second, "identity " + std::to_string(m) + " is in two groups");
    }
  }
}

bool position_at(const IdentityScript& identity, FrameIndex frame, double& x, double& y) {
  const PresenceWindow* w = window_at(identity, frame);
  return w != nullptr && interpolate(*w, frame, x, y);
}

Embedding random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (;;) {
    for (auto& c : v) c = rng.normal();
    double n2 = 0.0;
    for (double c : v) n2 += c * c;
    if (n2 > 1e-12) return Embedding(std::span<const double>(v));
  }
}

Embedding perturb(const Embedding& latent, double sigma, Rng& rng) {
  const auto base = latent.values();
  std::vector<double> v(base.size());
  const double scale = sigma / std::sqrt(static_cast<double>(base.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = base[i] + scale * rng.normal();
  return Embedding(std::span<const double>(v));
}

std::map<std::int64_t, Embedding> make_latents(const SceneScript& script) {
  Rng rng = Rng::stream(script.seed, 0x6c6174656e74ULL);
  std::map<std::int64_t, Embedding> out;
  for (const auto& ident : script.identities) out.emplace(ident.id, random_unit(rng, script.dim));

  for (const auto& g : script.latent_groups) {
    // Members share a common direction: cos between two of them is about a2.
    const double cos_min = std::max(0.0, 2.0 * g.min_similarity - 1.0);
    const double a2 = cos_min + 0.3 * (1.0 - cos_min);
    const double a = std::sqrt(a2);
    const double b = std::sqrt(1.0 - a2);
    bool done = false;
    for (int attempt = 0; attempt < 1000 && !done; ++attempt) {
      const Embedding base = random_unit(rng, script.dim);
      std::vector<Embedding> members;
      for (std::size_t m = 0; m < g.members.size(); ++m) {
        const Embedding u = random_unit(rng, script.dim);
        std::vector<double> v(script.dim);
        for (std::size_t i = 0; i < script.dim; ++i) v[i] = a * base.values()[i] + b * u.values()[i];
        members.emplace_back(std::span<const double>(v));
      }
      done = true;
      for (std::size_t i = 0; i < members.size() && done; ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          if (0.5 * (1.0 + members[i].dot(members[j])) < g.min_similarity) {
            done = false;
            break;
          }
        }
      }
      if (done) {
        for (std::size_t m = 0; m < g.members.size(); ++m) out.insert_or_assign(g.members[m], members[m]);
      }
    }
    if (!done) throw std::runtime_error("scene script: cannot realize latent group similarity");
  }
  return out;
}

GeneratedScene generate(const SceneScript& script) {
  script.validate();
  GeneratedScene scene;
  scene.latents = make_latents(script);

  std::vector<Rng> rngs;
  rngs.reserve(script.identities.size());
  for (const auto& ident : script.identities) {
    rngs.push_back(Rng::stream(script.seed, 2 * static_cast<std::uint64_t>(ident.id) + 1));
  }

  const double entry_ramp = 6.0;
  std::int64_t next_det = 1;
  for (FrameIndex f = 0; f < script.frame_count; ++f) {
    for (std::size_t k = 0; k < script.identities.size(); ++k) {
      const IdentityScript& ident = script.identities[k];
      const PresenceWindow* w = window_at(ident, f);
      if (w == nullptr) continue;
      Rng& rng = rngs[k];
      double x = 0.0;
      double y = 0.0;
      interpolate(*w, f, x, y);
      double nx = x;
      double ny = y;
      if (!interpolate(*w, f + 1, nx, ny)) {
        nx = x;
        ny = y;
      }

      // Draw everything up front so the stream does not depend on which
      // detections end up missing.
      const double jx = rng.normal(0.0, script.noise.box_sigma);
      const double jy = rng.normal(0.0, script.noise.box_sigma);
      const double jh = rng.normal(0.0, 0.5 * script.noise.box_sigma);
      const double n_conf = rng.normal(0.0, 0.01);
      const double n_sharp = rng.normal(0.0, 0.015);
      const double n_yaw = rng.normal(0.0, 3.0);
      const double n_pitch = rng.normal(0.0, 3.0);
      const double n_roll = rng.normal(0.0, 3.0);
      const bool missed = rng.bernoulli(script.noise.miss_rate);

      const double scale = 0.55 + 0.9 * std::clamp(y / script.frame_height, 0.0, 1.0);
      const double h = std::max(4.0, ident.face_height * scale + jh);
      const BBox box = BBox::from_center(x + jx, y + jy, 0.8 * h, h);

      double overlap = 0.0;
      bool hidden = x < 0.0 || y < 0.0 || x >= script.frame_width || y >= script.frame_height;
      for (const auto& occ : script.occluders) {
        if (f < occ.start || f >= occ.end) continue;
        if (inside(occ.rect, x, y)) hidden = true;
        overlap = std::max(overlap, overlap_fraction(box, occ.rect));
      }
      const std::vector<float> noise_draws = [&] {
        std::vector<float> g(script.dim);
        for (auto& c : g) c = static_cast<float>(rng.normal());
        return g;
      }();
      if (hidden || missed) continue;

      const double vx = nx - x;
      const double vy = ny - y;
      const double speed = std::hypot(vx, vy);
      const double since_entry = static_cast<double>(f - w->start);
      const double ramp = std::max(0.0, 1.0 - since_entry / entry_ramp);

      QualityAttrs q;
      q.det_confidence =
          std::clamp(ident.quality.confidence - 0.8 * overlap - 0.2 * ramp + n_conf, 0.0, 1.0);
      q.yaw = ident.quality.yaw + 25.0 * vx / (speed + 1.0) + 40.0 * ramp + n_yaw;
      q.pitch = ident.quality.pitch + n_pitch;
      q.roll = n_roll;
      q.sharpness =
          std::clamp(ident.quality.sharpness - 0.12 * (1.0 - std::min(scale, 1.0)) + n_sharp, 0.0, 1.0);

      const double penalty = 5.0 * std::max(0.0, 0.97 - q.det_confidence) + std::abs(q.yaw) / 40.0 +
                             4.0 * std::max(0.0, 0.95 - q.sharpness);
      const Embedding& latent = scene.latents.at(ident.id);
      const double sigma = script.noise.embedding_sigma * (1.0 + penalty) /
                           std::sqrt(static_cast<double>(script.dim));
      std::vector<double> v(script.dim);
      for (std::size_t i = 0; i < script.dim; ++i) {
        v[i] = latent.values()[i] + sigma * noise_draws[i];
      }

      const DetId det{next_det++};
      scene.detections.push_back(Detection{
          .frame = f,
          .id = det,
          .box = box,
          .embedding = Embedding(std::span<const double>(v)),
          .quality = q,
          .gt_id = ident.id,
      });
      scene.truth.push_back(metrics::EvalRecord{det, f, ident.id, TrackId{ident.id}});
    }
  }
  return scene;
}

std::vector<TemplateSet> make_ghosts(int n, int per_ghost, std::uint64_t seed, std::size_t dim,
                                     double sigma) {
  if (n < 0) throw std::invalid_argument("make_ghosts: negative count");
  if (per_ghost < 1) throw std::invalid_argument("make_ghosts: need at least one template");
  std::vector<TemplateSet> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::stream(seed, 0x67686f7374ULL + static_cast<std::uint64_t>(i));
    const Embedding latent = random_unit(rng, dim);
    TemplateSet g;
    g.id = kGhostIdBase + i;
    for (int k = 0; k < per_ghost; ++k) g.enrollables.push_back(perturb(latent, sigma, rng));
    for (int k = 0; k < per_ghost; ++k) g.verifiables.push_back(perturb(latent, sigma, rng));
    out.push_back(std::move(g));
  }
  return out;
}

FrameIndex max_gt_gap(const std::vector<Detection>& detections) {
  std::map<std::int64_t, FrameIndex> last;
  FrameIndex gap = 0;
  for (const auto& d : detections) {
    if (!d.gt_id) continue;
    auto [it, fresh] = last.try_emplace(*d.gt_id, d.frame);
    if (!fresh) {
      gap = std::max(gap, d.frame - it->second - 1);
      it->second = d.frame;
    }
  }
  return gap;
}

// ---------------------------------------------------------------------------

namespace {

PresenceWindow make_path(Rng& rng, FrameIndex start, FrameIndex end, double width, double height,
                         double speed, bool horizontal) {
  PresenceWindow w{start, end, {}};
  double x = rng.uniform(kMargin, width - kMargin);
  double y = rng.uniform(height * 0.25, height - kMargin);
  double heading = horizontal ? (rng.bernoulli(0.5) ? 0.0 : std::numbers::pi) + rng.normal(0.0, 0.15)
                              : rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double v = speed * rng.uniform(0.7, 1.3);
  constexpr FrameIndex kStep = 60;
  FrameIndex f = start;
  w.waypoints.push_back(Waypoint{f, x, y});
  while (f < end - 1) {
    const FrameIndex step = std::min(kStep, end - 1 - f);
    double nx = x + v * static_cast<double>(step) * std::cos(heading);
    double ny = y + v * static_cast<double>(step) * std::sin(heading);
    if (nx < kMargin || nx > width - kMargin) {
      heading = std::numbers::pi - heading;
      nx = std::clamp(nx, kMargin, width - kMargin);
    }
    if (ny < height * 0.2 || ny > height - kMargin) {
      heading = -heading;
      ny = std::clamp(ny, height * 0.2, height - kMargin);
    }
    heading += rng.normal(0.0, horizontal ? 0.1 : 0.35);
    f += step;
    x = nx;
    y = ny;
    w.waypoints.push_back(Waypoint{f, x, y});
  }
  return w;
}

}  // namespace

SceneScript make_scene(const SceneRecipe& r) {
  SceneScript s;
  s.name = r.name;
  s.seed = r.seed;
  s.frame_count = r.frame_count;
  s.noise = r.noise;
  Rng rng = Rng::stream(r.seed, 0x736365ULL);
  const double fc = static_cast<double>(r.frame_count);
  const bool horizontal = r.pillars > 0;

  for (int i = 0; i < r.identities; ++i) {
    IdentityScript ident;
    ident.id = i + 1;
    ident.face_height = rng.uniform(52.0, 76.0);
    ident.quality.confidence = rng.uniform(0.965, 0.995);
    ident.quality.sharpness = rng.uniform(0.93, 0.99);
    ident.quality.yaw = r.lateral > 0.0 ? (rng.bernoulli(0.5) ? r.lateral : -r.lateral) * rng.uniform(0.6, 1.0)
                                        : rng.normal(0.0, 5.0);
    ident.quality.pitch = rng.normal(0.0, 5.0);

    const bool comes_back = i < r.reentries;
    FrameIndex start = 0;
    FrameIndex end = 0;
    if (comes_back) {
      start = static_cast<FrameIndex>(rng.uniform(0.0, 0.12 * fc));
      end = start + static_cast<FrameIndex>(rng.uniform(0.25, 0.38) * fc);
    } else {
      start = static_cast<FrameIndex>(rng.uniform(0.0, 0.3 * fc));
      end = std::min(r.frame_count, start + static_cast<FrameIndex>(rng.uniform(0.45, 0.7) * fc));
    }
    ident.presence = make_path(rng, start, end, s.frame_width, s.frame_height, r.speed, horizontal);
    if (comes_back) {
      const FrameIndex gap = static_cast<FrameIndex>(rng.uniform(0.1, 0.25) * fc);
      const FrameIndex back = end + gap;
      const FrameIndex back_end =
          std::min(r.frame_count, back + static_cast<FrameIndex>(rng.uniform(0.2, 0.35) * fc));
      if (back_end - back >= 30) {
        ident.reentries.push_back(
            make_path(rng, back, back_end, s.frame_width, s.frame_height, r.speed, horizontal));
      }
    }
    s.identities.push_back(std::move(ident));
  }

  for (int p = 0; p < r.pillars; ++p) {
    const double slot = s.frame_width / static_cast<double>(r.pillars);
    const double w = rng.uniform(150.0, 210.0);
    const double x = slot * (p + 0.5) - 0.5 * w + rng.uniform(-0.2, 0.2) * slot;
    s.occluders.push_back(Occluder{BBox{x, s.frame_height * 0.1, w, s.frame_height * 0.85}, 0, r.frame_count});
  }
  for (int p = 0; p < r.passing; ++p) {
    const double w = rng.uniform(280.0, 420.0);
    const double h = rng.uniform(280.0, 420.0);
    const FrameIndex start = static_cast<FrameIndex>(rng.uniform(0.0, 0.8 * fc));
    const FrameIndex len = static_cast<FrameIndex>(rng.uniform(60.0, 150.0));
    s.occluders.push_back(Occluder{BBox{rng.uniform(0.0, s.frame_width - w),
                                        rng.uniform(s.frame_height * 0.2, s.frame_height - h), w, h},
                                   start, std::min(r.frame_count, start + len)});
  }
  for (int g = 0; g < r.confusable_groups; ++g) {
    LatentGroup group;
    for (int m = 0; m < r.group_size; ++m) {
      const int member = g * r.group_size + m + 1;
      if (member <= r.identities) group.members.push_back(member);
    }
    if (group.members.size() >= 2) s.latent_groups.push_back(std::move(group));
  }
  return s;
}

std::vector<SceneRecipe> benchmark_recipes() {
  auto recipe = [](std::string name, std::uint64_t seed) {
    SceneRecipe r;
    r.name = std::move(name);
    r.seed = seed;
    return r;
  };
  std::vector<SceneRecipe> out;

  auto r = recipe("entrance_reentry", 101);
  r.identities = 8;
  r.reentries = 4;
  out.push_back(r);

  r = recipe("corridor_pillars", 102);
  r.identities = 6;
  r.pillars = 3;
  out.push_back(r);

  r = recipe("hall_crowd", 103);
  r.identities = 16;
  r.reentries = 5;
  r.frame_count = 1200;
  out.push_back(r);

  r = recipe("side_camera", 104);
  r.identities = 8;
  r.reentries = 3;
  r.lateral = 30.0;
  out.push_back(r);

  r = recipe("passing_occluders", 105);
  r.identities = 10;
  r.passing = 4;
  r.reentries = 2;
  out.push_back(r);

  r = recipe("sparse_pair", 106);
  r.identities = 2;
  r.reentries = 2;
  r.frame_count = 600;
  out.push_back(r);

  r = recipe("long_session", 107);
  r.identities = 12;
  r.reentries = 6;
  r.pillars = 2;
  r.frame_count = 1800;
  out.push_back(r);

  r = recipe("noisy_detector", 108);
  r.identities = 8;
  r.reentries = 3;
  r.noise.miss_rate = 0.08;
  r.noise.box_sigma = 2.0;
  out.push_back(r);

  r = recipe("fast_walkers", 109);
  r.identities = 10;
  r.reentries = 4;
  r.speed = 5.0;
  out.push_back(r);

  r = recipe("mixed_conditions", 110);
  r.identities = 14;
  r.reentries = 5;
  r.pillars = 2;
  r.passing = 2;
  r.lateral = 15.0;
  r.frame_count = 1500;
  out.push_back(r);

  // Controls: nobody leaves and nothing occludes.
  r = recipe("control_calm", 111);
  r.identities = 5;
  r.noise.miss_rate = 0.0;
  out.push_back(r);

  r = recipe("control_busy", 112);
  r.identities = 9;
  r.noise.miss_rate = 0.0;
  out.push_back(r);

  return out;
}

std::vector<SceneScript> benchmark_suite() {
  std::vector<SceneScript> out;
  for (const auto& r : benchmark_recipes()) out.push_back(make_scene(r));
  return out;
}

std::vector<SceneScript> confusable_suite() {
  std::vector<SceneScript> out;
  for (int k = 0; k < 4; ++k) {
    SceneRecipe r;
    r.name = "lookalikes_" + std::to_string(k + 1);
    r.seed = 201 + static_cast<std::uint64_t>(k);
    r.identities = 12;
    r.reentries = 8;
    // Groups larger than the rank window: a query sees several lookalikes.
    r.confusable_groups = 2;
    r.group_size = 6;
    r.pillars = k % 2;
    r.frame_count = 1200;
    out.push_back(make_scene(r));
  }
  return out;
}

SceneScript correction_scene() {
  SceneScript s;
  s.name = "fragment_then_reconnect";
  s.seed = 4;
  s.frame_count = 300;
  s.noise = NoiseModel{0.3, 0.5, 0.0};

  IdentityScript walker;
  walker.id = 1;
  walker.presence = PresenceWindow{0, 300, {{0, 200.0, 700.0}, {299, 1697.0, 700.0}}};
  IdentityScript bystander;
  bystander.id = 2;
  bystander.presence = PresenceWindow{0, 300, {{0, 1500.0, 350.0}, {299, 1400.0, 380.0}}};
  s.identities = {walker, bystander};

  // The walker moves 5 px per frame, so crossing this wall hides it for
  // about 60 frames, twice the default coasting budget.
  s.occluders.push_back(Occluder{BBox{700.0, 500.0, 300.0, 400.0}, 0, 300});
  return s;
}

}  // namespace lttrack::sim
