// Python bindings. Detection streams cross the boundary as dicts of numpy
// arrays: frame (n), det_id (n), box (n, 4), embedding (n, D),
// quality (n, 5: conf, yaw, pitch, roll, sharp) and gt_id (n, -1 = none).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lttrack/assoc.hpp"
#include "lttrack/config.hpp"
#include "lttrack/io.hpp"
#include "lttrack/metrics.hpp"
#include "lttrack/reconnect.hpp"
#include "lttrack/sim.hpp"
#include "lttrack/study.hpp"
#include "lttrack/tracker.hpp"

namespace py = pybind11;
using namespace lttrack;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

Embedding to_embedding(const DoubleArray& a) {
  if (a.ndim() != 1) throw std::invalid_argument("embedding must be one dimensional");
  return Embedding(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())));
}

std::vector<Embedding> to_embeddings(const DoubleArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("template matrix must be two dimensional");
  std::vector<Embedding> out;
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  out.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) out.emplace_back(std::span<const double>(a.data() + r * cols, cols));
  return out;
}

BBox to_box(const std::array<double, 4>& b) { return BBox{b[0], b[1], b[2], b[3]}; }

py::dict stream_to_dict(std::span<const Detection> dets) {
  const auto n = static_cast<py::ssize_t>(dets.size());
  const auto dim = static_cast<py::ssize_t>(dets.empty() ? 0 : dets.front().embedding.dim());
  IntArray frame(n), det_id(n), gt(n);
  DoubleArray box({n, py::ssize_t{4}}), emb({n, dim}), quality({n, py::ssize_t{5}});
  auto f = frame.mutable_unchecked<1>();
  auto d = det_id.mutable_unchecked<1>();
  auto g = gt.mutable_unchecked<1>();
  auto b = box.mutable_unchecked<2>();
  auto e = emb.mutable_unchecked<2>();
  auto q = quality.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const Detection& det = dets[static_cast<std::size_t>(i)];
    f(i) = det.frame;
    d(i) = to_int(det.id);
    g(i) = det.gt_id.value_or(-1);
    b(i, 0) = det.box.x;
    b(i, 1) = det.box.y;
    b(i, 2) = det.box.w;
    b(i, 3) = det.box.h;
    const auto values = det.embedding.values();
    for (py::ssize_t k = 0; k < dim; ++k) e(i, k) = values[static_cast<std::size_t>(k)];
    q(i, 0) = det.quality.det_confidence;
    q(i, 1) = det.quality.yaw;
    q(i, 2) = det.quality.pitch;
    q(i, 3) = det.quality.roll;
    q(i, 4) = det.quality.sharpness;
  }
  py::dict out;
  out["frame"] = frame;
  out["det_id"] = det_id;
  out["box"] = box;
  out["embedding"] = emb;
  out["quality"] = quality;
  out["gt_id"] = gt;
  return out;
}

std::vector<Detection> dict_to_stream(const py::dict& s) {
  const auto frame = s["frame"].cast<IntArray>();
  const auto det_id = s["det_id"].cast<IntArray>();
  const auto box = s["box"].cast<DoubleArray>();
  const auto emb = s["embedding"].cast<DoubleArray>();
  const auto n = frame.size();
  if (det_id.size() != n || box.ndim() != 2 || box.shape(0) != n || box.shape(1) != 4 || emb.ndim() != 2 ||
      emb.shape(0) != n) {
    throw std::invalid_argument("stream arrays disagree in shape");
  }
  std::optional<DoubleArray> quality;
  std::optional<IntArray> gt;
  if (s.contains("quality")) quality = s["quality"].cast<DoubleArray>();
  if (s.contains("gt_id")) gt = s["gt_id"].cast<IntArray>();
  if (quality && (quality->ndim() != 2 || quality->shape(0) != n || quality->shape(1) != 5)) {
    throw std::invalid_argument("quality must have shape (n, 5)");
  }
  if (gt && gt->size() != n) throw std::invalid_argument("gt_id must have length n");

  const auto dim = static_cast<std::size_t>(emb.shape(1));
  std::vector<Detection> out;
  out.reserve(static_cast<std::size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) {
    Detection d{frame.at(i), DetId{det_id.at(i)},
                BBox{box.at(i, 0), box.at(i, 1), box.at(i, 2), box.at(i, 3)},
                Embedding(std::span<const double>(emb.data() + static_cast<std::size_t>(i) * dim, dim)),
                QualityAttrs{}, std::nullopt};
    if (quality) {
      d.quality = QualityAttrs{quality->at(i, 0), quality->at(i, 1), quality->at(i, 2), quality->at(i, 3),
                               quality->at(i, 4)};
    }
    if (gt && gt->at(i) >= 0) d.gt_id = gt->at(i);
    if (!out.empty() && d.frame < out.back().frame) throw std::invalid_argument("frames must be non-decreasing");
    out.push_back(std::move(d));
  }
  return out;
}

py::dict report_to_dict(const metrics::EvalReport& r) {
  py::dict out;
  out["smme"] = r.smme_count;
  out["hmme"] = r.hmme_count;
  out["num_dets"] = r.num_dets;
  out["num_ids"] = r.num_ids;
  out["frag"] = r.frag;
  out["idsw"] = r.idsw;
  out["crs"] = r.crs;
  out["crp"] = std::vector<double>(r.crp.begin(), r.crp.end());
  return out;
}

std::map<std::string, sim::SceneScript> bundled_scenes() {
  std::map<std::string, sim::SceneScript> all;
  for (auto& s : sim::benchmark_suite()) all.emplace(s.name, s);
  for (auto& s : sim::confusable_suite()) all.emplace(s.name, s);
  auto c = sim::correction_scene();
  all.emplace(c.name, c);
  return all;
}

std::vector<TemplateSet> to_template_sets(const py::list& sets) {
  std::vector<TemplateSet> out;
  for (const auto& item : sets) {
    const auto d = item.cast<py::dict>();
    TemplateSet t;
    t.id = d["id"].cast<std::int64_t>();
    t.enrollables = to_embeddings(d["enrollables"].cast<DoubleArray>());
    if (d.contains("verifiables")) t.verifiables = to_embeddings(d["verifiables"].cast<DoubleArray>());
    out.push_back(std::move(t));
  }
  return out;
}

py::list from_template_sets(std::span<const TemplateSet> sets) {
  auto matrix = [](const std::vector<Embedding>& es) {
    const auto rows = static_cast<py::ssize_t>(es.size());
    const auto cols = static_cast<py::ssize_t>(es.empty() ? 0 : es.front().dim());
    DoubleArray m({rows, cols});
    auto v = m.mutable_unchecked<2>();
    for (py::ssize_t r = 0; r < rows; ++r) {
      for (py::ssize_t c = 0; c < cols; ++c) v(r, c) = es[static_cast<std::size_t>(r)].values()[static_cast<std::size_t>(c)];
    }
    return m;
  };
  py::list out;
  for (const auto& t : sets) {
    py::dict d;
    d["id"] = t.id;
    d["enrollables"] = matrix(t.enrollables);
    d["verifiables"] = matrix(t.verifiables);
    out.append(d);
  }
  return out;
}

py::dict track(const py::dict& stream, const Config& cfg, const py::list& ghosts) {
  const auto dets = dict_to_stream(stream);
  const auto gh = to_template_sets(ghosts);
  RunResult run;
  {
    py::gil_scoped_release release;
    run = run_pipeline(cfg, dets, gh);
  }
  const auto n = static_cast<py::ssize_t>(run.entries.size());
  IntArray det(n), frame(n), emitted(n), corrected(n);
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& e = run.entries[static_cast<std::size_t>(i)];
    det.mutable_at(i) = to_int(e.det);
    frame.mutable_at(i) = e.frame;
    emitted.mutable_at(i) = to_int(e.emitted);
    corrected.mutable_at(i) = to_int(e.corrected);
  }
  py::list joins;
  for (const auto& j : run.joins) joins.append(py::make_tuple(j.frame, to_int(j.absorbed), to_int(j.surviving)));
  py::dict out;
  out["det_id"] = det;
  out["frame"] = frame;
  out["track_id_emitted"] = emitted;
  out["track_id_corrected"] = corrected;
  out["joins"] = joins;
  out["tracklets_created"] = run.stats.tracklets_created;
  const auto records = eval_records(run.entries, dets);
  if (!records.empty()) out["report"] = report_to_dict(metrics::evaluate(records));
  return out;
}

py::dict evaluate(const IntArray& frame, const IntArray& gt_id, const IntArray& track_id) {
  const auto n = frame.size();
  if (gt_id.size() != n || track_id.size() != n) throw std::invalid_argument("arrays must have equal length");
  std::vector<metrics::EvalRecord> records;
  records.reserve(static_cast<std::size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) {
    metrics::EvalRecord r{DetId{i + 1}, frame.at(i), gt_id.at(i), std::nullopt};
    if (track_id.at(i) >= 0) r.track = TrackId{track_id.at(i)};
    records.push_back(r);
  }
  return report_to_dict(metrics::evaluate(records));
}

}  // namespace

PYBIND11_MODULE(_lttrack, m) {
  m.doc() = "Long-term multi-face tracking with rank-based tracklet reconnection";

  py::enum_<FbtrMode>(m, "FbtrMode")
      .value("Off", FbtrMode::Off)
      .value("Simplified", FbtrMode::Simplified)
      .value("RankBased", FbtrMode::RankBased);
  py::enum_<PredictorKind>(m, "PredictorKind")
      .value("Static", PredictorKind::Static)
      .value("ConstantVelocity", PredictorKind::ConstantVelocity)
      .value("KalmanCV", PredictorKind::KalmanCV);
  py::enum_<CandidatePolicy>(m, "CandidatePolicy")
      .value("ExcludeBusy", CandidatePolicy::ExcludeBusy)
      .value("RankBusy", CandidatePolicy::RankBusy);

  py::class_<QualityBounds>(m, "QualityBounds")
      .def(py::init<>())
      .def_readwrite("min_confidence", &QualityBounds::min_confidence)
      .def_readwrite("max_abs_angle", &QualityBounds::max_abs_angle)
      .def_readwrite("min_sharpness", &QualityBounds::min_sharpness);

  py::class_<Config>(m, "Config")
      .def(py::init<>())
      .def_readwrite("lambda_iou", &Config::lambda_iou)
      .def_readwrite("lambda_fbtr", &Config::lambda_fbtr)
      .def_readwrite("lambda_s_fbtr", &Config::lambda_s_fbtr)
      .def_readwrite("epsilon", &Config::epsilon)
      .def_readwrite("rank_window", &Config::rank_window)
      .def_readwrite("max_coast", &Config::max_coast)
      .def_readwrite("enroll", &Config::enroll)
      .def_readwrite("verify", &Config::verify)
      .def_readwrite("fbtr_mode", &Config::fbtr_mode)
      .def_readwrite("candidate_policy", &Config::candidate_policy)
      .def_readwrite("tm_enabled", &Config::tm_enabled)
      .def_readwrite("cm_enabled", &Config::cm_enabled)
      .def_readwrite("predictor", &Config::predictor)
      .def("validate", &Config::validate)
      .def("to_json", [](const Config& c) { return io::config_json(c); })
      .def_static(
          "from_json", [](const std::string& text) { return io::parse_config(text); }, py::arg("text"));
  m.def("cosine_profile", &cosine_profile, "Defaults with the reconnection thresholds read as cosines");

  m.def(
      "iou", [](const std::array<double, 4>& a, const std::array<double, 4>& b) { return assoc::iou(to_box(a), to_box(b)); },
      py::arg("a"), py::arg("b"), "IOU of two (x, y, w, h) boxes");
  m.def(
      "hungarian",
      [](const DoubleArray& cost) {
        if (cost.ndim() != 2) throw std::invalid_argument("cost must be a matrix");
        Eigen::MatrixXd c(cost.shape(0), cost.shape(1));
        for (py::ssize_t r = 0; r < cost.shape(0); ++r) {
          for (py::ssize_t k = 0; k < cost.shape(1); ++k) c(r, k) = cost.at(r, k);
        }
        return assoc::hungarian(c);
      },
      py::arg("cost"), "Minimum-cost assignment as (row, col) pairs");

  m.def(
      "similarity", [](const DoubleArray& a, const DoubleArray& b) { return reconnect::similarity(to_embedding(a), to_embedding(b)); },
      py::arg("a"), py::arg("b"), "(1 + cos) / 2 of two embeddings");
  m.def(
      "check_rank_margin",
      [](const std::vector<double>& sims, double epsilon, int window) {
        return reconnect::check_rank_margin(sims, epsilon, window);
      },
      py::arg("sims"), py::arg("epsilon"), py::arg("window"), "Rank-margin test on descending similarities");
  m.def(
      "epsilon_star", [](const std::vector<double>& sims, int window) { return study::epsilon_star(sims, window); },
      py::arg("sims"), py::arg("window"), "Smallest epsilon at which the rank-margin test passes");

  m.def("scene_names", [] {
    std::vector<std::string> names;
    for (const auto& [name, s] : bundled_scenes()) names.push_back(name);
    return names;
  });
  m.def(
      "simulate",
      [](const std::string& scene, std::optional<std::uint64_t> seed) {
        const auto all = bundled_scenes();
        const auto it = all.find(scene);
        sim::SceneScript script = it != all.end() ? it->second : io::parse_scene(scene);
        if (seed) script.seed = *seed;
        const auto g = sim::generate(script);
        return stream_to_dict(g.detections);
      },
      py::arg("scene"), py::arg("seed") = py::none(),
      "Bundled scene name or scene script JSON -> stream dict");
  m.def(
      "read_detections", [](const std::string& path) { return stream_to_dict(io::read_detections(path)); },
      py::arg("path"));
  m.def(
      "write_detections",
      [](const std::string& path, const py::dict& stream) {
        const auto dets = dict_to_stream(stream);
        io::write_detections(std::filesystem::path(path), dets, dets.empty() ? 0 : dets.front().embedding.dim());
      },
      py::arg("path"), py::arg("stream"));
  m.def(
      "make_ghosts",
      [](int n, int per_ghost, std::uint64_t seed, std::size_t dim) {
        return from_template_sets(sim::make_ghosts(n, per_ghost, seed, dim));
      },
      py::arg("n"), py::arg("per_ghost") = 10, py::arg("seed") = 0, py::arg("dim") = 128);

  m.def("track", &track, py::arg("stream"), py::arg("config") = Config{}, py::arg("ghosts") = py::list(),
        "Runs the tracker over a stream dict; adds a metrics report when gt_id is present");
  m.def("evaluate", &evaluate, py::arg("frame"), py::arg("gt_id"), py::arg("track_id"),
        "Long-term metrics for per-detection ground truth and track ids (-1 = unassigned)");

  m.def(
      "run_study",
      [](int identities, int templates, std::vector<int> mix_levels, int c_min, int c_max, int reps,
         std::uint64_t seed) {
        study::StudyConfig cfg;
        cfg.identities = identities;
        cfg.templates = templates;
        cfg.mix_levels = std::move(mix_levels);
        cfg.c_min = c_min;
        cfg.c_max = c_max;
        cfg.reps = reps;
        cfg.seed = seed;
        study::StudyResult r;
        {
          py::gil_scoped_release release;
          r = study::run_study(cfg);
        }
        const auto n = static_cast<py::ssize_t>(r.samples.size());
        IntArray window(n), mix(n), rep(n);
        DoubleArray eps(n);
        std::vector<std::string> cls;
        cls.reserve(r.samples.size());
        for (py::ssize_t i = 0; i < n; ++i) {
          const auto& s = r.samples[static_cast<std::size_t>(i)];
          window.mutable_at(i) = s.window;
          mix.mutable_at(i) = s.mix_percent;
          rep.mutable_at(i) = s.rep;
          eps.mutable_at(i) = s.epsilon;
          cls.emplace_back(study::to_string(s.cls));
        }
        py::dict out;
        out["window"] = window;
        out["mix_percent"] = mix;
        out["rep"] = rep;
        out["cls"] = cls;
        out["epsilon"] = eps;
        return out;
      },
      py::arg("identities") = 200, py::arg("templates") = 30,
      py::arg("mix_levels") = std::vector<int>{0, 5, 10, 15, 20, 25}, py::arg("c_min") = 1, py::arg("c_max") = 9,
      py::arg("reps") = 10, py::arg("seed") = 7,
      "Parameter study samples: epsilon* per (C, mix level, repetition, query class)");
}
