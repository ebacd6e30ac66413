#pragma once

#include <stdexcept>
#include <string>

namespace vfraud {

enum class ErrorCode {
  InvalidArgument = 1,
  Validation,
  Ordering,
  Scheduling,
  UndefinedMetric,
  Fit,
  Io,
  UnknownScenario,
  Format,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the core; the C boundary maps `code()` onto
// vf_status values.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace vfraud
