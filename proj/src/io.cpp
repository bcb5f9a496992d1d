#include "lttrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace lttrack::io {

using nlohmann::json;
using nlohmann::ordered_json;

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + message
                                  : source + ": " + message),
      line_(line) {}

std::string format_float(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& source, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(source, line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(source, line, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
void maybe_field(const json& j, const char* key, T& dst, const std::string& source) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(source, 0, std::string("field '") + key + "' has the wrong type");
  }
}

json parse_json(std::string_view text, const std::string& source, std::size_t line) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(source, line, std::string("malformed JSON: ") + e.what());
  }
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::int64_t parse_int(std::string_view text, const std::string& source, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(source, line, "expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Reads a CSV file with a fixed header; calls `row` for every data line.
template <typename F>
void read_csv(const fs::path& path, std::string_view header, std::size_t columns, F&& row) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::string line;
  std::size_t n = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  ++n;
  strip_cr(line);
  if (line != header) throw ParseError(source, 1, "expected header '" + std::string(header) + "'");
  while (std::getline(in, line)) {
    ++n;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != columns) {
      throw ParseError(source, n, "expected " + std::to_string(columns) + " columns");
    }
    row(cells, source, n);
  }
}

void append_embedding(std::string& out, const Embedding& e) {
  out += '[';
  bool first = true;
  for (float v : e.values()) {
    if (!first) out += ',';
    first = false;
    out += format_float(v);
  }
  out += ']';
}

Embedding parse_embedding(const json& j, std::size_t dim, const std::string& source, std::size_t line) {
  if (!j.is_array()) throw ParseError(source, line, "embedding must be an array");
  if (dim != 0 && j.size() != dim) {
    throw ParseError(source, line,
                     "embedding has " + std::to_string(j.size()) + " values, header declares " +
                         std::to_string(dim));
  }
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& c : j) {
    if (!c.is_number()) throw ParseError(source, line, "embedding values must be numbers");
    v.push_back(c.get<double>());
  }
  try {
    return Embedding(std::span<const double>(v));
  } catch (const std::exception& e) {
    throw ParseError(source, line, e.what());
  }
}

std::size_t parse_header(const std::string& text, const std::string& source) {
  const json h = parse_json(text, source, 1);
  if (!h.is_object() || h.value("type", "") != "header") {
    throw ParseError(source, 1, "first line must be a header object");
  }
  const auto dim = get_field<std::int64_t>(h, "dim", source, 1);
  if (dim < 1) throw ParseError(source, 1, "dim must be positive");
  return static_cast<std::size_t>(dim);
}

}  // namespace

// --- detection streams -------------------------------------------------------

void write_detections(std::ostream& out, std::span<const Detection> detections, std::size_t dim) {
  out << "{\"type\":\"header\",\"dim\":" << dim << "}\n";
  std::string line;
  for (const auto& d : detections) {
    if (d.embedding.dim() != dim) throw std::invalid_argument("write_detections: embedding dimension mismatch");
    line.clear();
    line += "{\"frame\":" + std::to_string(d.frame);
    line += ",\"det_id\":" + std::to_string(to_int(d.id));
    line += ",\"box\":[" + format_float(d.box.x) + ',' + format_float(d.box.y) + ',' +
            format_float(d.box.w) + ',' + format_float(d.box.h) + ']';
    line += ",\"embedding\":";
    append_embedding(line, d.embedding);
    line += ",\"quality\":{\"conf\":" + format_float(d.quality.det_confidence) +
            ",\"yaw\":" + format_float(d.quality.yaw) + ",\"pitch\":" + format_float(d.quality.pitch) +
            ",\"roll\":" + format_float(d.quality.roll) + ",\"sharp\":" + format_float(d.quality.sharpness) +
            '}';
    if (d.gt_id) line += ",\"gt_id\":" + std::to_string(*d.gt_id);
    line += "}\n";
    out << line;
  }
}

void write_detections(const fs::path& path, std::span<const Detection> detections, std::size_t dim) {
  std::ostringstream ss;
  write_detections(ss, detections, dim);
  write_text(path, ss.str());
}

DetectionReader::DetectionReader(std::istream& in, std::string source)
    : in_(in), source_(std::move(source)) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    strip_cr(line);
    if (line.empty()) continue;
    if (line_ != 1) throw ParseError(source_, line_, "header must be the first line");
    dim_ = parse_header(line, source_);
    return;
  }
  throw ParseError(source_, 1, "missing header line");
}

std::optional<Detection> DetectionReader::next_record() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    strip_cr(line);
    if (line.empty()) continue;
    const json j = parse_json(line, source_, line_);
    if (!j.is_object()) throw ParseError(source_, line_, "record must be an object");

    const auto frame = get_field<std::int64_t>(j, "frame", source_, line_);
    if (frame < 0) throw ParseError(source_, line_, "negative frame");
    if (last_frame_ && frame < *last_frame_) {
      throw ParseError(source_, line_, "frame " + std::to_string(frame) + " after frame " +
                                           std::to_string(*last_frame_));
    }
    last_frame_ = frame;
    const auto det = get_field<std::int64_t>(j, "det_id", source_, line_);
    if (!seen_.insert(det).second) {
      throw ParseError(source_, line_, "duplicate det_id " + std::to_string(det));
    }
    const auto box = get_field<std::vector<double>>(j, "box", source_, line_);
    if (box.size() != 4) throw ParseError(source_, line_, "box needs 4 values");
    const BBox b{box[0], box[1], box[2], box[3]};
    if (!b.valid()) throw ParseError(source_, line_, "box must be finite with positive size");

    auto qit = j.find("quality");
    if (qit == j.end() || !qit->is_object()) throw ParseError(source_, line_, "missing quality object");
    QualityAttrs q;
    q.det_confidence = get_field<double>(*qit, "conf", source_, line_);
    q.yaw = get_field<double>(*qit, "yaw", source_, line_);
    q.pitch = get_field<double>(*qit, "pitch", source_, line_);
    q.roll = get_field<double>(*qit, "roll", source_, line_);
    q.sharpness = get_field<double>(*qit, "sharp", source_, line_);
    if (!q.valid()) throw ParseError(source_, line_, "quality attributes out of range");

    auto eit = j.find("embedding");
    if (eit == j.end()) throw ParseError(source_, line_, "missing field 'embedding'");
    std::optional<std::int64_t> gt;
    if (auto git = j.find("gt_id"); git != j.end() && !git->is_null()) {
      gt = get_field<std::int64_t>(j, "gt_id", source_, line_);
    }
    return Detection{frame, DetId{det}, b, parse_embedding(*eit, dim_, source_, line_), q, gt};
  }
  return std::nullopt;
}

std::optional<std::vector<Detection>> DetectionReader::next_frame() {
  if (!pending_) pending_ = next_record();
  if (!pending_) return std::nullopt;
  std::vector<Detection> frame;
  const FrameIndex f = pending_->frame;
  frame.push_back(std::move(*pending_));
  pending_.reset();
  while (auto d = next_record()) {
    if (d->frame != f) {
      pending_ = std::move(d);
      break;
    }
    frame.push_back(std::move(*d));
  }
  return frame;
}

std::vector<Detection> read_detections(const fs::path& path, std::size_t* dim) {
  auto in = open_input(path);
  DetectionReader reader(in, path.string());
  if (dim != nullptr) *dim = reader.dim();
  std::vector<Detection> out;
  while (auto frame = reader.next_frame()) {
    std::move(frame->begin(), frame->end(), std::back_inserter(out));
  }
  return out;
}

// --- tracking outputs --------------------------------------------------------

void write_tracks(std::ostream& out, std::span<const correction::RecordEntry> entries) {
  out << "frame,det_id,track_id_emitted,track_id_corrected\n";
  for (const auto& e : entries) {
    out << e.frame << ',' << to_int(e.det) << ',' << to_int(e.emitted) << ',' << to_int(e.corrected)
        << '\n';
  }
}

void write_tracks(const fs::path& path, std::span<const correction::RecordEntry> entries) {
  std::ostringstream ss;
  write_tracks(ss, entries);
  write_text(path, ss.str());
}

std::vector<correction::RecordEntry> read_tracks(const fs::path& path) {
  std::vector<correction::RecordEntry> out;
  read_csv(path, "frame,det_id,track_id_emitted,track_id_corrected", 4,
           [&](const auto& c, const std::string& src, std::size_t n) {
             out.push_back(correction::RecordEntry{DetId{parse_int(c[1], src, n)}, parse_int(c[0], src, n),
                                                   TrackId{parse_int(c[2], src, n)},
                                                   TrackId{parse_int(c[3], src, n)}});
           });
  return out;
}

void write_joins(const fs::path& path, std::span<const reconnect::JoinPair> joins) {
  std::ostringstream ss;
  ss << "frame,absorbed,surviving\n";
  for (const auto& j : joins) ss << j.frame << ',' << to_int(j.absorbed) << ',' << to_int(j.surviving) << '\n';
  write_text(path, ss.str());
}

void write_gt(const fs::path& path, std::span<const Detection> detections) {
  std::ostringstream ss;
  ss << "frame,det_id,gt_id\n";
  for (const auto& d : detections) {
    if (d.gt_id) ss << d.frame << ',' << to_int(d.id) << ',' << *d.gt_id << '\n';
  }
  write_text(path, ss.str());
}

std::vector<GtRow> read_gt(const fs::path& path) {
  std::vector<GtRow> out;
  read_csv(path, "frame,det_id,gt_id", 3, [&](const auto& c, const std::string& src, std::size_t n) {
    out.push_back(GtRow{parse_int(c[0], src, n), DetId{parse_int(c[1], src, n)}, parse_int(c[2], src, n)});
  });
  return out;
}

std::vector<metrics::EvalRecord> join_tracks_gt(std::span<const correction::RecordEntry> tracks,
                                                std::span<const GtRow> gt) {
  std::unordered_map<std::int64_t, const correction::RecordEntry*> by_det;
  by_det.reserve(tracks.size());
  for (const auto& t : tracks) by_det.emplace(to_int(t.det), &t);
  std::vector<metrics::EvalRecord> out;
  out.reserve(gt.size());
  for (const auto& g : gt) {
    auto it = by_det.find(to_int(g.det));
    if (it == by_det.end()) {
      throw std::invalid_argument("ground-truth detection " + std::to_string(to_int(g.det)) +
                                  " has no track row; the files describe different streams");
    }
    if (it->second->frame != g.frame) {
      throw std::invalid_argument("detection " + std::to_string(to_int(g.det)) +
                                  " is on different frames in tracks and ground truth");
    }
    out.push_back(metrics::EvalRecord{g.det, g.frame, g.gt_id, it->second->corrected});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.frame < b.frame; });
  return out;
}

// --- reports -----------------------------------------------------------------

std::string report_json(const metrics::EvalReport& r) {
  ordered_json j;
  j["smme_count"] = r.smme_count;
  j["hmme_count"] = r.hmme_count;
  j["num_dets"] = r.num_dets;
  j["num_ids"] = r.num_ids;
  j["frag"] = r.frag;
  j["idsw"] = r.idsw;
  j["crs"] = r.crs;
  j["crp"] = r.crp;
  return j.dump(2) + "\n";
}

metrics::EvalReport parse_report(std::string_view text) {
  const std::string source = "report";
  const json j = parse_json(text, source, 0);
  metrics::EvalReport r;
  r.smme_count = get_field<std::int64_t>(j, "smme_count", source, 0);
  r.hmme_count = get_field<std::int64_t>(j, "hmme_count", source, 0);
  r.num_dets = get_field<std::int64_t>(j, "num_dets", source, 0);
  r.num_ids = get_field<std::int64_t>(j, "num_ids", source, 0);
  r.frag = get_field<double>(j, "frag", source, 0);
  r.idsw = get_field<double>(j, "idsw", source, 0);
  r.crs = get_field<double>(j, "crs", source, 0);
  const auto crp = get_field<std::vector<double>>(j, "crp", source, 0);
  if (crp.size() != r.crp.size()) throw ParseError(source, 0, "crp must have 100 values");
  std::copy(crp.begin(), crp.end(), r.crp.begin());
  return r;
}

void write_report(const fs::path& path, const metrics::EvalReport& report) {
  write_text(path, report_json(report));
}

metrics::EvalReport read_report(const fs::path& path) { return parse_report(read_text(path)); }

void write_crp_csv(const fs::path& path, const std::array<double, metrics::kCrpPoints>& crp) {
  std::ostringstream ss;
  ss << "X,CR_X\n";
  for (std::size_t i = 0; i < crp.size(); ++i) ss << i + 1 << ',' << format_float(crp[i]) << '\n';
  write_text(path, ss.str());
}

std::string line_plot_svg(std::string_view title, std::string_view x_label, std::string_view y_label,
                          std::span<const Series> series, double y_min, double y_max) {
  constexpr double kW = 640.0;
  constexpr double kH = 400.0;
  constexpr double kLeft = 60.0;
  constexpr double kRight = 150.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 50.0;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
  }
  if (!(x_min < x_max)) {
    x_min = 0.0;
    x_max = 1.0;
  }
  if (!(y_min < y_max)) y_max = y_min + 1.0;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (std::clamp(y, y_min, y_max) - y_min) / (y_max - y_min)) * ph; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    s << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
      << num(fx) << "</text>\n";
    s << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">"
      << num(fy) << "</text>\n";
  }
  s << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kH - 10) << "\" text-anchor=\"middle\">"
    << x_label << "</text>\n";
  s << "<text x=\"14\" y=\"" << num(kTop + ph / 2) << "\" transform=\"rotate(-90 14 " << num(kTop + ph / 2)
    << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].points.size(); ++i) {
      const auto& [x, y] = series[k].points[i];
      s << (i ? " " : "") << num(px(x)) << ',' << num(py(y));
    }
    s << "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    s << "<line x1=\"" << num(kW - kRight + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
      << num(kW - kRight + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << num(kW - kRight + 36) << "\" y=\"" << num(ly) << "\">" << series[k].label
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// --- configuration -----------------------------------------------------------

Config parse_config(std::string_view text, Config cfg, const std::string& source) {
  const json j = parse_json(text, source, 0);
  if (!j.is_object()) throw ParseError(source, 0, "config must be a JSON object");
  static const std::map<std::string, int> kKnown = {
      {"lambda_iou", 0}, {"lambda_fbtr", 0}, {"lambda_s_fbtr", 0}, {"epsilon", 0}, {"rank_window", 0},
      {"max_coast", 0}, {"enroll_min_confidence", 0}, {"enroll_max_abs_angle", 0},
      {"enroll_min_sharpness", 0}, {"verify_min_confidence", 0}, {"verify_max_abs_angle", 0},
      {"verify_min_sharpness", 0}, {"fbtr", 0}, {"candidate_policy", 0}, {"tm", 0}, {"cm", 0},
      {"predictor", 0}, {"kalman_process", 0}, {"kalman_measurement", 0}};
  for (const auto& [key, value] : j.items()) {
    if (kKnown.count(key) == 0) throw ParseError(source, 0, "unknown config key '" + key + "'");
  }
  maybe_field(j, "lambda_iou", cfg.lambda_iou, source);
  maybe_field(j, "lambda_fbtr", cfg.lambda_fbtr, source);
  maybe_field(j, "lambda_s_fbtr", cfg.lambda_s_fbtr, source);
  maybe_field(j, "epsilon", cfg.epsilon, source);
  maybe_field(j, "rank_window", cfg.rank_window, source);
  maybe_field(j, "max_coast", cfg.max_coast, source);
  maybe_field(j, "enroll_min_confidence", cfg.enroll.min_confidence, source);
  maybe_field(j, "enroll_max_abs_angle", cfg.enroll.max_abs_angle, source);
  maybe_field(j, "enroll_min_sharpness", cfg.enroll.min_sharpness, source);
  maybe_field(j, "verify_min_confidence", cfg.verify.min_confidence, source);
  maybe_field(j, "verify_max_abs_angle", cfg.verify.max_abs_angle, source);
  maybe_field(j, "verify_min_sharpness", cfg.verify.min_sharpness, source);
  maybe_field(j, "tm", cfg.tm_enabled, source);
  maybe_field(j, "cm", cfg.cm_enabled, source);
  maybe_field(j, "kalman_process", cfg.kalman.process, source);
  maybe_field(j, "kalman_measurement", cfg.kalman.measurement, source);
  try {
    if (auto it = j.find("fbtr"); it != j.end()) cfg.fbtr_mode = parse_fbtr_mode(it->get<std::string>());
    if (auto it = j.find("candidate_policy"); it != j.end()) {
      cfg.candidate_policy = parse_candidate_policy(it->get<std::string>());
    }
    if (auto it = j.find("predictor"); it != j.end()) cfg.predictor = parse_predictor(it->get<std::string>());
  } catch (const std::exception& e) {
    throw ParseError(source, 0, e.what());
  }
  return cfg;
}

Config read_config(const fs::path& path, Config base) {
  return parse_config(read_text(path), base, path.string());
}

std::string config_json(const Config& c) {
  ordered_json j;
  j["lambda_iou"] = c.lambda_iou;
  j["lambda_fbtr"] = c.lambda_fbtr;
  j["lambda_s_fbtr"] = c.lambda_s_fbtr;
  j["epsilon"] = c.epsilon;
  j["rank_window"] = c.rank_window;
  j["max_coast"] = c.max_coast;
  j["enroll_min_confidence"] = c.enroll.min_confidence;
  j["enroll_max_abs_angle"] = c.enroll.max_abs_angle;
  j["enroll_min_sharpness"] = c.enroll.min_sharpness;
  j["verify_min_confidence"] = c.verify.min_confidence;
  j["verify_max_abs_angle"] = c.verify.max_abs_angle;
  j["verify_min_sharpness"] = c.verify.min_sharpness;
  j["fbtr"] = std::string(to_string(c.fbtr_mode));
  j["candidate_policy"] = std::string(to_string(c.candidate_policy));
  j["tm"] = c.tm_enabled;
  j["cm"] = c.cm_enabled;
  j["predictor"] = std::string(to_string(c.predictor));
  j["kalman_process"] = c.kalman.process;
  j["kalman_measurement"] = c.kalman.measurement;
  return j.dump(2) + "\n";
}

// --- scene scripts -----------------------------------------------------------

namespace {

std::vector<sim::Waypoint> parse_waypoints(const json& j, const std::string& source) {
  std::vector<sim::Waypoint> out;
  if (!j.is_array()) throw ParseError(source, 0, "waypoints must be an array");
  for (const auto& w : j) {
    if (!w.is_array() || w.size() != 3) throw ParseError(source, 0, "waypoint must be [frame, x, y]");
    try {
      out.push_back(sim::Waypoint{w[0].get<FrameIndex>(), w[1].get<double>(), w[2].get<double>()});
    } catch (const json::exception&) {
      throw ParseError(source, 0, "waypoint must be [frame, x, y]");
    }
  }
  return out;
}

ordered_json waypoints_json(const std::vector<sim::Waypoint>& pts) {
  ordered_json a = ordered_json::array();
  for (const auto& p : pts) a.push_back(ordered_json::array({p.frame, p.x, p.y}));
  return a;
}

}  // namespace

sim::SceneScript parse_scene(std::string_view text, const std::string& source) {
  const json j = parse_json(text, source, 0);
  if (!j.is_object()) throw ParseError(source, 0, "scene must be a JSON object");
  sim::SceneScript s;
  maybe_field(j, "name", s.name, source);
  s.seed = get_field<std::uint64_t>(j, "seed", source, 0);
  s.frame_count = get_field<FrameIndex>(j, "frame_count", source, 0);
  maybe_field(j, "frame_width", s.frame_width, source);
  maybe_field(j, "frame_height", s.frame_height, source);
  maybe_field(j, "dim", s.dim, source);
  if (auto it = j.find("noise"); it != j.end()) {
    maybe_field(*it, "embedding_sigma", s.noise.embedding_sigma, source);
    maybe_field(*it, "box_sigma", s.noise.box_sigma, source);
    maybe_field(*it, "miss_rate", s.noise.miss_rate, source);
  }
  for (const auto& ij : j.value("identities", json::array())) {
    sim::IdentityScript ident;
    ident.id = get_field<std::int64_t>(ij, "id", source, 0);
    ident.presence.start = get_field<FrameIndex>(ij, "entry", source, 0);
    ident.presence.end = get_field<FrameIndex>(ij, "exit", source, 0);
    ident.presence.waypoints = parse_waypoints(ij.value("waypoints", json::array()), source);
    for (const auto& rj : ij.value("reentries", json::array())) {
      sim::PresenceWindow w;
      w.start = get_field<FrameIndex>(rj, "start", source, 0);
      w.end = get_field<FrameIndex>(rj, "end", source, 0);
      w.waypoints = parse_waypoints(rj.value("waypoints", json::array()), source);
      ident.reentries.push_back(std::move(w));
    }
    maybe_field(ij, "face_height", ident.face_height, source);
    if (auto qt = ij.find("quality"); qt != ij.end()) {
      maybe_field(*qt, "confidence", ident.quality.confidence, source);
      maybe_field(*qt, "sharpness", ident.quality.sharpness, source);
      maybe_field(*qt, "yaw", ident.quality.yaw, source);
      maybe_field(*qt, "pitch", ident.quality.pitch, source);
    }
    s.identities.push_back(std::move(ident));
  }
  for (const auto& oj : j.value("occluders", json::array())) {
    const auto r = get_field<std::vector<double>>(oj, "rect", source, 0);
    if (r.size() != 4) throw ParseError(source, 0, "occluder rect needs 4 values");
    s.occluders.push_back(sim::Occluder{BBox{r[0], r[1], r[2], r[3]}, get_field<FrameIndex>(oj, "start", source, 0),
                                        get_field<FrameIndex>(oj, "end", source, 0)});
  }
  for (const auto& gj : j.value("latent_groups", json::array())) {
    sim::LatentGroup g;
    g.members = get_field<std::vector<std::int64_t>>(gj, "members", source, 0);
    maybe_field(gj, "min_similarity", g.min_similarity, source);
    s.latent_groups.push_back(std::move(g));
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 0, e.what());
  }
  return s;
}

sim::SceneScript read_scene(const fs::path& path) { return parse_scene(read_text(path), path.string()); }

std::string scene_json(const sim::SceneScript& s) {
  ordered_json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["frame_count"] = s.frame_count;
  j["frame_width"] = s.frame_width;
  j["frame_height"] = s.frame_height;
  j["dim"] = s.dim;
  j["noise"] = ordered_json{{"embedding_sigma", s.noise.embedding_sigma},
                            {"box_sigma", s.noise.box_sigma},
                            {"miss_rate", s.noise.miss_rate}};
  ordered_json ids = ordered_json::array();
  for (const auto& ident : s.identities) {
    ordered_json ij;
    ij["id"] = ident.id;
    ij["entry"] = ident.presence.start;
    ij["exit"] = ident.presence.end;
    ij["waypoints"] = waypoints_json(ident.presence.waypoints);
    ordered_json re = ordered_json::array();
    for (const auto& w : ident.reentries) {
      re.push_back(ordered_json{{"start", w.start}, {"end", w.end}, {"waypoints", waypoints_json(w.waypoints)}});
    }
    ij["reentries"] = re;
    ij["face_height"] = ident.face_height;
    ij["quality"] = ordered_json{{"confidence", ident.quality.confidence},
                                 {"sharpness", ident.quality.sharpness},
                                 {"yaw", ident.quality.yaw},
                                 {"pitch", ident.quality.pitch}};
    ids.push_back(std::move(ij));
  }
  j["identities"] = ids;
  ordered_json occ = ordered_json::array();
  for (const auto& o : s.occluders) {
    occ.push_back(ordered_json{{"rect", {o.rect.x, o.rect.y, o.rect.w, o.rect.h}}, {"start", o.start}, {"end", o.end}});
  }
  j["occluders"] = occ;
  ordered_json groups = ordered_json::array();
  for (const auto& g : s.latent_groups) {
    groups.push_back(ordered_json{{"members", g.members}, {"min_similarity", g.min_similarity}});
  }
  j["latent_groups"] = groups;
  return j.dump(2) + "\n";
}

// --- template sets -----------------------------------------------------------

void write_template_sets(const fs::path& path, std::span<const TemplateSet> sets) {
  std::size_t dim = 0;
  for (const auto& s : sets) {
    for (const auto* list : {&s.enrollables, &s.verifiables}) {
      for (const auto& e : *list) {
        if (dim == 0) dim = e.dim();
        if (e.dim() != dim) throw std::invalid_argument("write_template_sets: mixed dimensions");
      }
    }
  }
  std::string out = "{\"type\":\"header\",\"dim\":" + std::to_string(dim == 0 ? 1 : dim) + "}\n";
  for (const auto& s : sets) {
    out += "{\"id\":" + std::to_string(s.id) + ",\"enrollables\":[";
    for (std::size_t i = 0; i < s.enrollables.size(); ++i) {
      if (i) out += ',';
      append_embedding(out, s.enrollables[i]);
    }
    out += "],\"verifiables\":[";
    for (std::size_t i = 0; i < s.verifiables.size(); ++i) {
      if (i) out += ',';
      append_embedding(out, s.verifiables[i]);
    }
    out += "]}\n";
  }
  write_text(path, out);
}

std::vector<TemplateSet> read_template_sets(const fs::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::string line;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<TemplateSet> out;
  while (std::getline(in, line)) {
    ++n;
    strip_cr(line);
    if (line.empty()) continue;
    if (dim == 0) {
      if (n != 1) throw ParseError(source, n, "header must be the first line");
      dim = parse_header(line, source);
      continue;
    }
    const json j = parse_json(line, source, n);
    TemplateSet s;
    s.id = get_field<std::int64_t>(j, "id", source, n);
    for (const char* key : {"enrollables", "verifiables"}) {
      auto it = j.find(key);
      if (it == j.end() || !it->is_array()) throw ParseError(source, n, std::string("missing ") + key);
      auto& dst = std::string_view(key) == "enrollables" ? s.enrollables : s.verifiables;
      for (const auto& e : *it) dst.push_back(parse_embedding(e, dim, source, n));
    }
    out.push_back(std::move(s));
  }
  if (dim == 0) throw ParseError(source, 1, "missing header line");
  return out;
}

// --- parameter study ---------------------------------------------------------

void write_study_samples(const fs::path& path, const study::StudyResult& result) {
  std::ostringstream ss;
  ss << "C,mix_percent,rep,class,epsilon\n";
  for (const auto& s : result.samples) {
    ss << s.window << ',' << s.mix_percent << ',' << s.rep << ',' << study::to_string(s.cls) << ','
       << format_float(s.epsilon) << '\n';
  }
  write_text(path, ss.str());
}

void write_study_summary(const fs::path& path, const study::StudyResult& result,
                         const study::StudyConfig& cfg, std::span<const double> epsilons) {
  // Bucket once instead of rescanning the samples for every cell.
  std::map<std::tuple<int, int, int>, std::vector<double>> buckets;
  for (const auto& s : result.samples) {
    buckets[{s.window, s.mix_percent, static_cast<int>(s.cls)}].push_back(s.epsilon);
  }
  std::ostringstream ss;
  ss << "C,mix_percent,epsilon,class,pct_filtered,n\n";
  for (int c = cfg.c_min; c <= cfg.c_max; ++c) {
    for (int mix : cfg.mix_levels) {
      for (double eps : epsilons) {
        for (auto cls : {study::QueryClass::CorrectReconnection, study::QueryClass::WrongReconnection,
                         study::QueryClass::IdSwitch}) {
          const auto it = buckets.find({c, mix, static_cast<int>(cls)});
          const std::size_t n = it == buckets.end() ? 0 : it->second.size();
          std::size_t filtered = 0;
          if (n > 0) {
            for (double e : it->second) filtered += e > eps ? 1 : 0;
          }
          const double pct = n == 0 ? 0.0 : 100.0 * static_cast<double>(filtered) / static_cast<double>(n);
          ss << c << ',' << mix << ',' << format_float(eps) << ',' << study::to_string(cls) << ','
             << format_float(pct) << ',' << n << '\n';
        }
      }
    }
  }
  write_text(path, ss.str());
}

}  // namespace lttrack::io
