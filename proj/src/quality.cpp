#include "lttrack/quality.hpp"

#include <cmath>

namespace lttrack::quality {

std::string_view to_string(QualityClass c) {
  switch (c) {
    case QualityClass::Discarded: return "discarded";
    case QualityClass::Verifiable: return "verifiable";
    case QualityClass::Enrollable: return "enrollable";
  }
  return "?";
}

bool meets(const QualityAttrs& q, const QualityBounds& bounds) {
  return q.det_confidence >= bounds.min_confidence && std::abs(q.yaw) <= bounds.max_abs_angle &&
         std::abs(q.pitch) <= bounds.max_abs_angle && std::abs(q.roll) <= bounds.max_abs_angle &&
         q.sharpness >= bounds.min_sharpness;
}

QualityClass classify(const QualityAttrs& q, const QualityBounds& enroll,
                      const QualityBounds& verify) {
  if (!meets(q, verify)) return QualityClass::Discarded;
  if (meets(q, enroll)) return QualityClass::Enrollable;
  return QualityClass::Verifiable;
}

}  // namespace lttrack::quality
