#include "svfem/error.hpp"

namespace svfem {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::mesh_mismatch: return "mesh-mismatch";
    case ErrorCode::unsupported_degree: return "unsupported-degree";
    case ErrorCode::unsupported_geometry: return "unsupported-geometry";
    case ErrorCode::construction_failure: return "construction-failure";
    case ErrorCode::solver_failure: return "solver-failure";
    case ErrorCode::step_failure: return "step-failure";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace svfem
