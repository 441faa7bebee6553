#include "camnav/error.hpp"

namespace camnav {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kMarkerNotDetected: return "marker-not-detected";
    case ErrorCode::kDegenerateOrientation: return "degenerate-orientation";
    case ErrorCode::kTooFewPoints: return "too-few-points";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kNonPositiveScale: return "negative-or-zero-scale";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kFrameError: return "frame-error";
    case ErrorCode::kUnsupportedKind: return "unsupported-kind";
    case ErrorCode::kStaleFrame: return "stale-frame";
    case ErrorCode::kBindFailure: return "bind-failure";
    case ErrorCode::kConnectionClosed: return "connection-closed";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace camnav
