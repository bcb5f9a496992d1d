#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace lttrack {

/// Track identifier. Allocated monotonically, never reused within a run.
enum class TrackId : std::int64_t {};

/// Detection identifier, unique per run.
enum class DetId : std::int64_t {};

using FrameIndex = std::int64_t;

constexpr std::int64_t to_int(TrackId id) { return static_cast<std::int64_t>(id); }
constexpr std::int64_t to_int(DetId id) { return static_cast<std::int64_t>(id); }

/// Raised when a mean template cannot be normalized (antipodal inputs).
class DegenerateTemplate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box in pixels, (x, y) is the top-left corner.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  double area() const { return w * h; }
  bool valid() const;

  static BBox from_center(double cx, double cy, double w, double h) {
    return BBox{cx - 0.5 * w, cy - 0.5 * h, w, h};
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Unit-length appearance template. Components are stored in single
/// precision; all products accumulate in double.
class Embedding {
 public:
  /// Normalizes `raw`. Throws std::invalid_argument on an empty, non-finite
  /// or zero-norm input.
  explicit Embedding(std::span<const double> raw);
  explicit Embedding(std::span<const float> raw);

  std::size_t dim() const { return values_.size(); }
  std::span<const float> values() const { return values_; }
  double dot(const Embedding& other) const;
  double norm() const;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  template <typename T>
  void assign_normalized(std::span<const T> raw);

  std::vector<float> values_;
};

/// Accumulates embeddings; the normalized sum is the normalized mean.
class EmbeddingSum {
 public:
  explicit EmbeddingSum(std::size_t dim = 0) : sum_(dim, 0.0) {}

  void add(const Embedding& e);
  void add(const EmbeddingSum& other);
  std::size_t count() const { return count_; }
  std::size_t dim() const { return sum_.size(); }
  std::span<const double> raw() const { return sum_; }
  /// Normalized mean. Throws DegenerateTemplate when the sum has zero norm.
  Embedding mean() const;

 private:
  std::vector<double> sum_;
  std::size_t count_ = 0;
};

struct QualityAttrs {
  double det_confidence = 1.0;
  double yaw = 0.0;    // degrees
  double pitch = 0.0;  // degrees
  double roll = 0.0;   // degrees
  double sharpness = 1.0;

  bool valid() const;
  friend bool operator==(const QualityAttrs&, const QualityAttrs&) = default;
};

struct Detection {
  FrameIndex frame = 0;
  DetId id{};
  BBox box;
  Embedding embedding;
  QualityAttrs quality;
  std::optional<std::int64_t> gt_id;
};

/// Enrollable and verifiable templates of one identity that never appeared
/// as a detection stream: distractors preloaded into the gallery, or the
/// identities of a parameter-study database.
struct TemplateSet {
  std::int64_t id = 0;
  std::vector<Embedding> enrollables;
  std::vector<Embedding> verifiables;
};

}  // namespace lttrack
