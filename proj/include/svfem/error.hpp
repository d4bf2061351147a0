#pragma once

#include <stdexcept>
#include <string>

namespace svfem {

enum class ErrorCode {
  invalid_argument,
  mesh_mismatch,
  unsupported_degree,
  unsupported_geometry,
  construction_failure,
  solver_failure,
  step_failure,
  io_error,
};

const char* to_string(ErrorCode code);

/// Exception type used across the library. The code identifies the failure
/// class so that callers (e.g. the time loop cutting dt) can react to it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace svfem
