#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ifind {

enum class ErrorCode {
  UnknownPreset,
  InvalidConfig,
  LimitViolation,
  NotConverged,
  ParseError,
  DegenerateMesh,
  OffSurface,
  EmptyPath,
  ClearanceInfeasible,
  PlanFailed,
  DegenerateTable,
  InvalidAnswer,
  TickRegression,
  RejectedInFault,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Base of every domain error raised by the library. The code is stable and
// maps onto wire-protocol error names and CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ifind
