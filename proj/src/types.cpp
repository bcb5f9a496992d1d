#include "lttrack/types.hpp"

#include <cmath>

namespace lttrack {

bool BBox::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
         w > 0.0 && h > 0.0;
}

bool QualityAttrs::valid() const {
  return std::isfinite(det_confidence) && std::isfinite(yaw) && std::isfinite(pitch) &&
         std::isfinite(roll) && std::isfinite(sharpness) && det_confidence >= 0.0 &&
         det_confidence <= 1.0 && sharpness >= 0.0 && sharpness <= 1.0;
}

template <typename T>
void Embedding::assign_normalized(std::span<const T> raw) {
  if (raw.empty()) throw std::invalid_argument("embedding must not be empty");
  double sq = 0.0;
  for (T v : raw) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw std::invalid_argument("embedding contains a non-finite component");
    }
    sq += static_cast<double>(v) * static_cast<double>(v);
  }
  const double n = std::sqrt(sq);
  if (!(n > 1e-300)) throw DegenerateTemplate("embedding has zero norm");
  values_.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    values_[i] = static_cast<float>(static_cast<double>(raw[i]) / n);
  }
}

Embedding::Embedding(std::span<const double> raw) { assign_normalized(raw); }
Embedding::Embedding(std::span<const float> raw) { assign_normalized(raw); }

double Embedding::dot(const Embedding& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("embedding dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    acc += static_cast<double>(values_[i]) * static_cast<double>(other.values_[i]);
  }
  return acc;
}

double Embedding::norm() const { return std::sqrt(dot(*this)); }

void EmbeddingSum::add(const Embedding& e) {
  if (sum_.empty() && count_ == 0) sum_.assign(e.dim(), 0.0);
  if (e.dim() != sum_.size()) throw std::invalid_argument("embedding dimension mismatch");
  const auto v = e.values();
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += v[i];
  ++count_;
}

void EmbeddingSum::add(const EmbeddingSum& other) {
  if (other.count_ == 0) return;
  if (sum_.empty() && count_ == 0) sum_.assign(other.sum_.size(), 0.0);
  if (other.sum_.size() != sum_.size()) {
    throw std::invalid_argument("embedding dimension mismatch");
  }
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += other.sum_[i];
  count_ += other.count_;
}

Embedding EmbeddingSum::mean() const {
  if (count_ == 0) throw DegenerateTemplate("mean of an empty template set");
  double sq = 0.0;
  for (double v : sum_) sq += v * v;
  // Relative to the count: a sum of unit vectors this short is antipodal noise.
  if (std::sqrt(sq) <= 1e-9 * static_cast<double>(count_)) {
    throw DegenerateTemplate("mean template has zero norm");
  }
  return Embedding(std::span<const double>(sum_));
}

}  // namespace lttrack
