#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lttrack/config.hpp"
#include "lttrack/correction.hpp"
#include "lttrack/metrics.hpp"
#include "lttrack/sim.hpp"
#include "lttrack/study.hpp"
#include "lttrack/types.hpp"

namespace lttrack::io {

namespace fs = std::filesystem;

/// Malformed input, positioned at a 1-based line (0 when not line based).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Failure to open, read or write a file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "%.9g" rendering: nine significant digits restore any float exactly.
std::string format_float(double value);

void write_text(const fs::path& path, std::string_view content);
std::string read_text(const fs::path& path);

// --- detection streams (JSONL) ---------------------------------------------

void write_detections(std::ostream& out, std::span<const Detection> detections, std::size_t dim);
void write_detections(const fs::path& path, std::span<const Detection> detections, std::size_t dim);

/// Reads a detection stream one frame at a time.
class DetectionReader {
 public:
  /// Consumes the header line. Throws ParseError when it is missing.
  DetectionReader(std::istream& in, std::string source);

  std::size_t dim() const { return dim_; }
  /// All detections of the next frame present in the stream, or nullopt at
  /// the end.
  std::optional<std::vector<Detection>> next_frame();

 private:
  std::optional<Detection> next_record();

  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
  std::size_t dim_ = 0;
  std::optional<Detection> pending_;
  std::optional<FrameIndex> last_frame_;
  std::unordered_set<std::int64_t> seen_;
};

std::vector<Detection> read_detections(const fs::path& path, std::size_t* dim = nullptr);

// --- tracking outputs (CSV) --------------------------------------------------

void write_tracks(std::ostream& out, std::span<const correction::RecordEntry> entries);
void write_tracks(const fs::path& path, std::span<const correction::RecordEntry> entries);
std::vector<correction::RecordEntry> read_tracks(const fs::path& path);

void write_joins(const fs::path& path, std::span<const reconnect::JoinPair> joins);

struct GtRow {
  FrameIndex frame = 0;
  DetId det{};
  std::int64_t gt_id = 0;
};

void write_gt(const fs::path& path, std::span<const Detection> detections);
std::vector<GtRow> read_gt(const fs::path& path);

/// Joins tracks and ground truth on det_id, using the corrected ids. Throws
/// std::invalid_argument when a ground-truth detection has no track row or a
/// row disagrees on the frame.
std::vector<metrics::EvalRecord> join_tracks_gt(std::span<const correction::RecordEntry> tracks,
                                                std::span<const GtRow> gt);

// --- reports -----------------------------------------------------------------

std::string report_json(const metrics::EvalReport& report);
metrics::EvalReport parse_report(std::string_view json);
void write_report(const fs::path& path, const metrics::EvalReport& report);
metrics::EvalReport read_report(const fs::path& path);

void write_crp_csv(const fs::path& path, const std::array<double, metrics::kCrpPoints>& crp);

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Minimal SVG line chart, byte-stable for identical inputs.
std::string line_plot_svg(std::string_view title, std::string_view x_label, std::string_view y_label,
                          std::span<const Series> series, double y_min, double y_max);

// --- configuration -----------------------------------------------------------

/// Flat JSON object of Config fields. Keys not present keep the value from
/// `base`; unknown keys are rejected.
Config parse_config(std::string_view json, Config base = {}, const std::string& source = "config");
Config read_config(const fs::path& path, Config base = {});
std::string config_json(const Config& cfg);

// --- scene scripts -----------------------------------------------------------

sim::SceneScript parse_scene(std::string_view json, const std::string& source = "scene");
sim::SceneScript read_scene(const fs::path& path);
std::string scene_json(const sim::SceneScript& script);

// --- template sets (ghosts, study databases) ---------------------------------

void write_template_sets(const fs::path& path, std::span<const TemplateSet> sets);
std::vector<TemplateSet> read_template_sets(const fs::path& path);

// --- parameter study ---------------------------------------------------------

void write_study_samples(const fs::path& path, const study::StudyResult& result);
/// Filtering percentages for every (C, mix level, class) and each epsilon.
void write_study_summary(const fs::path& path, const study::StudyResult& result,
                         const study::StudyConfig& cfg, std::span<const double> epsilons);

}  // namespace lttrack::io
