#include "avt/error.hpp"

namespace avt {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kEmptyMeasure: return "empty measure";
    case ErrorCode::kInvalidDensity: return "invalid density";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kDegeneratePair: return "degenerate pair";
    case ErrorCode::kEmptySites: return "empty site list";
    case ErrorCode::kInvalidSites: return "invalid sites";
    case ErrorCode::kDemandMismatch: return "demand mismatch";
    case ErrorCode::kTargetOverflow: return "target overflow";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kNotConverged: return "not converged";
    case ErrorCode::kInfeasible: return "infeasible balance";
    case ErrorCode::kTooLarge: return "instance too large";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace avt
