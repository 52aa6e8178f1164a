#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parallax {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveDepth,
  DegeneratePlane,
  MapsToInfinity,
  ParallaxSingularity,
  GridMismatch,
  SingularHomography,
  DegenerateInput,
  NoConsensus,
  EpipoleDegeneracy,
  SingularRatio,
  ZeroTranslation,
  PatchTooLarge,
  EmptyMask,
  EmptyBucket,
  ShapeMismatch,
  MalformedHeader,
  SizeMismatch,
  IoFailure,
  MissingFile,
  IncongruentGrids,
};

/// Stable identifier used in CLI error output, e.g. "NonPositiveDepth".
std::string_view to_string(ErrorCode code) noexcept;

/// The single exception type thrown by the library. Callers that care about
/// the failure kind switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace parallax
