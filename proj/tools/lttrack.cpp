// Command line front end: tracking, ablation, metrics, simulation and the
// reconnection parameter study.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lttrack/config.hpp"
#include "lttrack/io.hpp"
#include "lttrack/metrics.hpp"
#include "lttrack/sim.hpp"
#include "lttrack/study.hpp"
#include "lttrack/tracker.hpp"

namespace fs = std::filesystem;
using namespace lttrack;

namespace {

constexpr const char* kOutDirEnv = "LTTRACK_OUT_DIR";

// --out-dir wins, then the environment, then ./out.
fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "out";
}

struct ConfigFlags {
  std::string config_path;
  std::string profile = "default";
  std::string fbtr;
  std::string predictor;
  bool tm = true;
  bool cm = true;
  CLI::Option* tm_opt = nullptr;
  CLI::Option* cm_opt = nullptr;

  void add_file_flags(CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flat Config keys)")->check(CLI::ExistingFile);
    sub->add_option("--profile", profile, "Base defaults: 'default' or 'cosine' (thresholds read as cosines)")
        ->check(CLI::IsMember({"default", "cosine"}));
  }

  void add_module_flags(CLI::App* sub) {
    sub->add_option("--fbtr", fbtr, "Reconnection mode")->check(CLI::IsMember({"off", "simplified", "rank"}));
    sub->add_option("--predictor", predictor, "Box predictor")->check(CLI::IsMember({"static", "cv", "kalman"}));
    tm_opt = sub->add_flag("--tm,!--no-tm", tm, "Enable the tracking module (coasting)");
    cm_opt = sub->add_flag("--cm,!--no-cm", cm, "Enable the correction module");
  }

  // CLI flag > config file > profile default.
  Config build() const {
    Config cfg = profile == "cosine" ? cosine_profile() : Config{};
    if (!config_path.empty()) cfg = io::read_config(config_path, cfg);
    if (!fbtr.empty()) {
      cfg.fbtr_mode = parse_fbtr_mode(fbtr);
      // Turning reconnection off implies no correction unless --cm says otherwise.
      if (cfg.fbtr_mode == FbtrMode::Off && (cm_opt == nullptr || cm_opt->count() == 0)) cfg.cm_enabled = false;
    }
    if (!predictor.empty()) cfg.predictor = parse_predictor(predictor);
    if (tm_opt != nullptr && tm_opt->count() > 0) cfg.tm_enabled = tm;
    if (cm_opt != nullptr && cm_opt->count() > 0) {
      if (cm && cfg.fbtr_mode == FbtrMode::Off) {
        throw std::invalid_argument("--cm needs reconnection; use --fbtr simplified|rank");
      }
      cfg.cm_enabled = cm;
    }
    cfg.validate();
    return cfg;
  }
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_summary(const std::string& label, const metrics::EvalReport& r, double fps) {
  std::printf("%-18s Frag=%s IDSW=%s CRS=%s FPS=%s\n", label.c_str(), fixed(r.frag, 5).c_str(),
              fixed(r.idsw, 5).c_str(), fixed(r.crs, 3).c_str(), fixed(fps, 1).c_str());
}

std::vector<io::GtRow> gt_rows(std::span<const Detection> dets) {
  std::vector<io::GtRow> rows;
  for (const auto& d : dets) {
    if (d.gt_id) rows.push_back(io::GtRow{d.frame, d.id, *d.gt_id});
  }
  return rows;
}

// --- track -----------------------------------------------------------------

struct TrackArgs {
  std::string input;
  std::string ghosts;
  std::string out_dir;
  std::uint64_t seed = 0;
  ConfigFlags flags;
};

int run_track(const TrackArgs& a) {
  const Config cfg = a.flags.build();
  const fs::path out = resolve_out_dir(a.out_dir);

  Tracker tracker(cfg);
  if (!a.ghosts.empty()) {
    const auto ghosts = io::read_template_sets(a.ghosts);
    tracker.preload(ghosts);
  }

  std::ifstream in(a.input);
  if (!in) throw io::IoError("cannot open '" + a.input + "'");
  io::DetectionReader reader(in, a.input);
  std::vector<io::GtRow> gt;
  std::int64_t frames = 0;
  double seconds = 0.0;
  while (auto frame = reader.next_frame()) {
    for (const auto& d : *frame) {
      if (d.gt_id) gt.push_back(io::GtRow{d.frame, d.id, *d.gt_id});
    }
    const auto t0 = std::chrono::steady_clock::now();
    tracker.process_frame(frame->front().frame, *frame);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++frames;
  }

  const auto& entries = tracker.record().entries();
  io::write_tracks(out / "tracks.csv", entries);
  io::write_joins(out / "joins.csv", tracker.joins());
  io::write_text(out / "config.json", io::config_json(cfg));
  std::printf("frames=%lld detections=%zu tracklets=%lld joins=%zu\n", static_cast<long long>(frames),
              entries.size(), static_cast<long long>(tracker.stats().tracklets_created), tracker.joins().size());
  const double fps = seconds > 0.0 ? static_cast<double>(frames) / seconds : 0.0;
  if (gt.empty()) {
    std::printf("no ground truth in input; FPS=%s\n", fixed(fps, 1).c_str());
    return 0;
  }
  const auto report = metrics::evaluate(io::join_tracks_gt(entries, gt));
  io::write_report(out / "report.json", report);
  io::write_crp_csv(out / "crp.csv", report.crp);
  print_summary("result", report, fps);
  return 0;
}

// --- ablate ----------------------------------------------------------------

struct AblationRow {
  const char* name;
  bool tm;
  FbtrMode fbtr;
  bool cm;
};

constexpr AblationRow kAblationRows[] = {
    {"DA", false, FbtrMode::Off, false},
    {"DA+TM", true, FbtrMode::Off, false},
    {"DA+S_FBTR", false, FbtrMode::Simplified, false},
    {"DA+TM+S_FBTR", true, FbtrMode::Simplified, false},
    {"DA+TM+S_FBTR+CM", true, FbtrMode::Simplified, true},
    {"DA+FBTR", false, FbtrMode::RankBased, false},
    {"DA+TM+FBTR", true, FbtrMode::RankBased, false},
    {"DA+TM+FBTR+CM", true, FbtrMode::RankBased, true},
};

struct AblateArgs {
  std::string input;
  std::string out_dir;
  std::uint64_t seed = 0;
  ConfigFlags flags;
};

int run_ablate(const AblateArgs& a) {
  const Config base = a.flags.build();
  const fs::path out = resolve_out_dir(a.out_dir);
  const auto stream = io::read_detections(a.input);
  const auto gt = gt_rows(stream);
  if (gt.empty()) throw std::invalid_argument("ablate: input '" + a.input + "' has no ground truth");

  std::ostringstream csv;
  std::ostringstream text;
  csv << "tracker,frags,id_switches,crs,smme,hmme,joins\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %9s %12s %6s %7s\n", "Tracker", "Frags", "ID-Switches", "CRS", "Joins");
  text << line;
  std::printf("%-18s %9s %12s %6s %7s %7s\n", "Tracker", "Frags", "ID-Switches", "CRS", "Joins", "FPS");
  for (const auto& row : kAblationRows) {
    Config cfg = base;
    cfg.tm_enabled = row.tm;
    cfg.fbtr_mode = row.fbtr;
    cfg.cm_enabled = row.cm;
    const auto run = run_pipeline(cfg, stream);
    const auto r = metrics::evaluate(io::join_tracks_gt(run.entries, gt));
    csv << row.name << ',' << io::format_float(r.frag) << ',' << io::format_float(r.idsw) << ','
        << io::format_float(r.crs) << ',' << r.smme_count << ',' << r.hmme_count << ',' << run.joins.size() << '\n';
    std::snprintf(line, sizeof line, "%-18s %9s %12s %6s %7zu", row.name, fixed(r.frag, 5).c_str(),
                  fixed(r.idsw, 5).c_str(), fixed(r.crs, 3).c_str(), run.joins.size());
    text << line << '\n';
    const double fps = run.seconds > 0.0 ? static_cast<double>(run.stats.frames) / run.seconds : 0.0;
    std::printf("%s %7s\n", line, fixed(fps, 1).c_str());
  }
  io::write_text(out / "ablation.csv", csv.str());
  io::write_text(out / "ablation.txt", text.str());
  return 0;
}

// --- metrics ---------------------------------------------------------------

struct MetricsArgs {
  std::string tracks;
  std::string gt;
  std::string out_dir;
  std::uint64_t seed = 0;
};

int run_metrics(const MetricsArgs& a) {
  const auto tracks = io::read_tracks(a.tracks);
  const auto gt = io::read_gt(a.gt);
  const auto report = metrics::evaluate(io::join_tracks_gt(tracks, gt));
  const fs::path out = resolve_out_dir(a.out_dir);
  io::write_report(out / "report.json", report);
  io::write_crp_csv(out / "crp.csv", report.crp);
  std::printf("Frag=%s IDSW=%s CRS=%s smme=%lld hmme=%lld detections=%lld identities=%lld\n",
              fixed(report.frag, 5).c_str(), fixed(report.idsw, 5).c_str(), fixed(report.crs, 3).c_str(),
              static_cast<long long>(report.smme_count), static_cast<long long>(report.hmme_count),
              static_cast<long long>(report.num_dets), static_cast<long long>(report.num_ids));
  return 0;
}

// --- simulate / scenes / ghosts --------------------------------------------

std::map<std::string, sim::SceneScript> bundled_scenes() {
  std::map<std::string, sim::SceneScript> all;
  for (auto& s : sim::benchmark_suite()) all.emplace(s.name, s);
  for (auto& s : sim::confusable_suite()) all.emplace(s.name, s);
  auto c = sim::correction_scene();
  all.emplace(c.name, c);
  return all;
}

struct SimulateArgs {
  std::string script;
  std::string scene;
  std::string out;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& a) {
  sim::SceneScript script;
  if (!a.script.empty()) {
    script = io::read_scene(a.script);
  } else {
    const auto all = bundled_scenes();
    const auto it = all.find(a.scene);
    if (it == all.end()) throw std::invalid_argument("unknown bundled scene '" + a.scene + "'");
    script = it->second;
  }
  if (a.seed) script.seed = *a.seed;
  const auto scene = sim::generate(script);
  const fs::path stream = a.out.empty() ? resolve_out_dir(a.out_dir) / (script.name + ".jsonl") : fs::path(a.out);
  fs::path gt = stream;
  gt.replace_extension(".gt.csv");
  io::write_detections(stream, scene.detections, script.dim);
  io::write_gt(gt, scene.detections);
  std::printf("%s: %zu detections over %lld frames -> %s\n", script.name.c_str(), scene.detections.size(),
              static_cast<long long>(script.frame_count), stream.string().c_str());
  return 0;
}

struct ScenesArgs {
  std::string suite = "benchmark";
  std::string out_dir;
  std::uint64_t seed = 0;
};

int run_scenes(const ScenesArgs& a) {
  std::vector<sim::SceneScript> scenes;
  if (a.suite == "benchmark" || a.suite == "all") {
    for (auto& s : sim::benchmark_suite()) scenes.push_back(s);
  }
  if (a.suite == "confusable" || a.suite == "all") {
    for (auto& s : sim::confusable_suite()) scenes.push_back(s);
  }
  if (a.suite == "correction" || a.suite == "all") scenes.push_back(sim::correction_scene());
  const fs::path out = resolve_out_dir(a.out_dir);
  for (const auto& s : scenes) {
    io::write_text(out / (s.name + ".json"), io::scene_json(s));
    std::printf("%s\n", (out / (s.name + ".json")).string().c_str());
  }
  return 0;
}

struct GhostsArgs {
  int count = 100;
  int per_ghost = 10;
  std::size_t dim = 128;
  double sigma = 0.35;
  std::uint64_t seed = 0;
  std::string out;
  std::string out_dir;
};

int run_ghosts(const GhostsArgs& a) {
  const auto ghosts = sim::make_ghosts(a.count, a.per_ghost, a.seed, a.dim, a.sigma);
  const fs::path path =
      a.out.empty() ? resolve_out_dir(a.out_dir) / ("ghosts_" + std::to_string(a.count) + ".jsonl") : fs::path(a.out);
  io::write_template_sets(path, ghosts);
  std::printf("%d ghosts -> %s\n", a.count, path.string().c_str());
  return 0;
}

// --- sweep-fbtr ------------------------------------------------------------

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad integer '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) {
    const int v = std::stoi(text);
    return {v, v};
  }
  return {std::stoi(text.substr(0, dash)), std::stoi(text.substr(dash + 1))};
}

struct SweepArgs {
  std::string db;
  std::string mix_levels = "0,5,10,15,20,25";
  std::string c_range = "1-9";
  int reps = 10;
  int identities = 200;
  int templates = 30;
  double epsilon = 0.8;
  std::uint64_t seed = 7;
  std::string out_dir;
};

int run_sweep(const SweepArgs& a) {
  study::StudyConfig cfg;
  cfg.mix_levels = parse_int_list(a.mix_levels);
  std::tie(cfg.c_min, cfg.c_max) = parse_range(a.c_range);
  cfg.reps = a.reps;
  cfg.identities = a.identities;
  cfg.templates = a.templates;
  cfg.seed = a.seed;
  for (int m : cfg.mix_levels) {
    if (m < 0 || m > 100) throw std::invalid_argument("mix level out of [0, 100]");
  }

  std::vector<TemplateSet> identities;
  if (!a.db.empty()) identities = io::read_template_sets(a.db);
  const auto result = study::run_study(cfg, identities);

  const fs::path out = resolve_out_dir(a.out_dir);
  std::vector<double> epsilons;
  for (int i = 50; i <= 100; i += 5) epsilons.push_back(i / 100.0);
  if (std::find(epsilons.begin(), epsilons.end(), a.epsilon) == epsilons.end()) epsilons.push_back(a.epsilon);
  std::sort(epsilons.begin(), epsilons.end());
  io::write_study_samples(out / "study_samples.csv", result);
  io::write_study_summary(out / "study_summary.csv", result, cfg, epsilons);

  using study::QueryClass;
  for (const QueryClass cls :
       {QueryClass::CorrectReconnection, QueryClass::WrongReconnection, QueryClass::IdSwitch}) {
    std::vector<io::Series> series;
    for (int m : cfg.mix_levels) {
      io::Series s{std::to_string(m) + "% mixed", {}};
      for (int c = cfg.c_min; c <= cfg.c_max; ++c) s.points.emplace_back(c, result.filtered_pct(c, m, cls, a.epsilon));
      series.push_back(std::move(s));
    }
    const std::string name(study::to_string(cls));
    io::write_text(out / ("filtered_" + name + ".svg"),
                   io::line_plot_svg(name + " filtered at epsilon " + io::format_float(a.epsilon), "C",
                                     "% filtered", series, 0.0, 100.0));
  }

  std::printf("%4s %5s %10s %10s %10s  (%% filtered at epsilon %s)\n", "mix", "C", "correct", "wrong", "id_switch",
              io::format_float(a.epsilon).c_str());
  for (int m : cfg.mix_levels) {
    for (int c = cfg.c_min; c <= cfg.c_max; ++c) {
      std::printf("%4d %5d %10s %10s %10s\n", m, c,
                  fixed(result.filtered_pct(c, m, QueryClass::CorrectReconnection, a.epsilon), 1).c_str(),
                  fixed(result.filtered_pct(c, m, QueryClass::WrongReconnection, a.epsilon), 1).c_str(),
                  fixed(result.filtered_pct(c, m, QueryClass::IdSwitch, a.epsilon), 1).c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-term multi-face tracker with rank-based tracklet reconnection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lttrack 0.1.0");
  const std::string out_help = std::string("Output directory (default $") + kOutDirEnv + " or ./out)";
  const std::string seed_help = "Seed; tracking itself draws no random numbers";

  TrackArgs track;
  auto* track_cmd = app.add_subcommand("track", "Track a detection stream");
  track_cmd->add_option("--input", track.input, "Detection stream (JSONL)")->required()->check(CLI::ExistingFile);
  track_cmd->add_option("--ghosts", track.ghosts, "Ghost template sets to preload")->check(CLI::ExistingFile);
  track_cmd->add_option("--out-dir", track.out_dir, out_help);
  track_cmd->add_option("--seed", track.seed, seed_help);
  track.flags.add_file_flags(track_cmd);
  track.flags.add_module_flags(track_cmd);

  AblateArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run the eight module combinations on one stream");
  ablate_cmd->add_option("--input", ablate.input, "Detection stream with ground truth")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--out-dir", ablate.out_dir, out_help);
  ablate_cmd->add_option("--seed", ablate.seed, seed_help);
  ablate.flags.add_file_flags(ablate_cmd);

  MetricsArgs met;
  auto* metrics_cmd = app.add_subcommand("metrics", "Evaluate a track file against ground truth");
  metrics_cmd->add_option("--tracks", met.tracks, "tracks.csv")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--gt", met.gt, "Ground truth CSV (frame,det_id,gt_id)")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--out-dir", met.out_dir, out_help);
  metrics_cmd->add_option("--seed", met.seed, seed_help);

  SimulateArgs simulate;
  std::uint64_t sim_seed = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a detection stream and ground truth from a scene");
  auto* script_opt = sim_cmd->add_option("--script", simulate.script, "Scene script (JSON)")->check(CLI::ExistingFile);
  auto* scene_opt = sim_cmd->add_option("--scene", simulate.scene, "Bundled scene name");
  script_opt->excludes(scene_opt);
  auto* seed_opt = sim_cmd->add_option("--seed", sim_seed, "Override the script seed");
  sim_cmd->add_option("--out", simulate.out, "Stream path; ground truth goes next to it as .gt.csv");
  sim_cmd->add_option("--out-dir", simulate.out_dir, out_help);

  ScenesArgs scenes;
  auto* scenes_cmd = app.add_subcommand("scenes", "Write the bundled scene scripts");
  scenes_cmd->add_option("--suite", scenes.suite, "benchmark|confusable|correction|all")
      ->check(CLI::IsMember({"benchmark", "confusable", "correction", "all"}));
  scenes_cmd->add_option("--out-dir", scenes.out_dir, out_help);
  scenes_cmd->add_option("--seed", scenes.seed, "Unused; scene seeds are part of the scripts");

  GhostsArgs ghosts;
  auto* ghosts_cmd = app.add_subcommand("ghosts", "Generate ghost (distractor) template sets");
  ghosts_cmd->add_option("--count", ghosts.count, "Number of ghosts")->check(CLI::NonNegativeNumber);
  ghosts_cmd->add_option("--per-ghost", ghosts.per_ghost, "Enrollable templates per ghost")->check(CLI::PositiveNumber);
  ghosts_cmd->add_option("--dim", ghosts.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  ghosts_cmd->add_option("--sigma", ghosts.sigma, "Template noise")->check(CLI::NonNegativeNumber);
  ghosts_cmd->add_option("--seed", ghosts.seed, "Seed");
  ghosts_cmd->add_option("--out", ghosts.out, "Output path");
  ghosts_cmd->add_option("--out-dir", ghosts.out_dir, out_help);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-fbtr", "Rank-margin parameter study over mixed-identity databases");
  sweep_cmd->add_option("--db", sweep.db, "Identity template sets (default: generated)")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--mix-levels", sweep.mix_levels, "Comma separated percentages");
  sweep_cmd->add_option("--c-range", sweep.c_range, "Rank window range, e.g. 1-9");
  sweep_cmd->add_option("--reps", sweep.reps, "Repetitions per mix level")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--identities", sweep.identities, "Generated identities")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--templates", sweep.templates, "Templates per generated identity")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--epsilon", sweep.epsilon, "Epsilon for the printed table and plots")
      ->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--seed", sweep.seed, "Seed");
  sweep_cmd->add_option("--out-dir", sweep.out_dir, out_help);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*track_cmd) return run_track(track);
    if (*ablate_cmd) return run_ablate(ablate);
    if (*metrics_cmd) return run_metrics(met);
    if (*sim_cmd) {
      if (script_opt->count() == 0 && scene_opt->count() == 0) {
        throw std::invalid_argument("simulate needs --script or --scene");
      }
      if (seed_opt->count() > 0) simulate.seed = sim_seed;
      return run_simulate(simulate);
    }
    if (*scenes_cmd) return run_scenes(scenes);
    if (*ghosts_cmd) return run_ghosts(ghosts);
    if (*sweep_cmd) return run_sweep(sweep);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lttrack: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
