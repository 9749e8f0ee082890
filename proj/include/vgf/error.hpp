#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vgf {

enum class ErrorCode {
  InvalidArgument,
  SymmetryViolation,
  NotPsd,
  NonEvenMeasure,
  NotRealKernel,
  NotHermitian,
  MismatchedSystems,
  InternalConsistency,
  Parse,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code so the
// CLI can emit a structured error record.
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

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace vgf
