#pragma once

#include <stdexcept>
#include <string>

namespace hetnet {

// Failure classes, grouped by the process exit code they map to.
enum class ErrorCode {
  // configuration / input problems (exit 3)
  ConfigError,
  UsageError,
  // hypothesis-validation failures surfaced as hard errors (exit 1)
  HypothesisError,
  // numerical aborts (exit 2)
  OnStableManifold,    // x = 0: never leaves the section
  OutsideChart,        // ||x|| >= 1 or delta >= 1: local chart invalid
  DegenerateGlobalMap, // generic condition fails: M(e_pm) b_pm has zero first component
  EpsTooLarge,         // itinerary balls would overlap
  StiffAbort,          // step-size underflow in the integrator
  Escaped,             // return-map iterate left the chart
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what_arg)
      : std::runtime_error(what_arg), code_(code) {}

  ErrorCode code() const { return code_; }

  // Set for errors raised while composing maps along a loop; -1 otherwise.
  int leg = -1;

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace hetnet
