#pragma once

#include <stdexcept>
#include <string>

namespace avt {

enum class ErrorCode {
  kEmptyMeasure,
  kInvalidDensity,
  kDimensionMismatch,
  kDegeneratePair,
  kEmptySites,
  kInvalidSites,
  kDemandMismatch,
  kTargetOverflow,
  kInvalidArgument,
  kNotConverged,
  kInfeasible,
  kTooLarge,
  kParse,
  kIo,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; code() identifies the
// failure class and what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace avt
