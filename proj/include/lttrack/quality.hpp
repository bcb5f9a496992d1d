#pragma once

#include <string_view>

#include "lttrack/config.hpp"
#include "lttrack/types.hpp"

namespace lttrack::quality {

enum class QualityClass { Discarded, Verifiable, Enrollable };

std::string_view to_string(QualityClass c);

/// True when every attribute is within `bounds` (inclusive).
bool meets(const QualityAttrs& q, const QualityBounds& bounds);

/// Enrollable faces must also pass the verifiable bounds, so the enrollable
/// set is always contained in the verifiable one.
QualityClass classify(const QualityAttrs& q, const QualityBounds& enroll,
                      const QualityBounds& verify);

inline QualityClass classify(const QualityAttrs& q, const Config& cfg) {
  return classify(q, cfg.enroll, cfg.verify);
}

inline bool is_verifiable(QualityClass c) { return c != QualityClass::Discarded; }

}  // namespace lttrack::quality
