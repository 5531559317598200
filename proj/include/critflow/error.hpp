#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace critflow {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteValue,
  DegenerateOperator,
  MaxRefinement,
  NotStabilized,
  OutOfMemory,
  ThresholdOnGrid,
  NotIsolated,
  EpsilonTooLarge,
  SingularLevel,
  FloorViolated,
  StepUnstable,
  TrackingStalled,
  WindowTooSmall,
  DirectionOutsideTruncation,
  ManifestError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the toolkit carries one of the codes above so that
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace critflow
