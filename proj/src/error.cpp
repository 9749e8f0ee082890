#include "vgf/error.hpp"

namespace vgf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::SymmetryViolation: return "symmetry_violation";
    case ErrorCode::NotPsd: return "not_psd";
    case ErrorCode::NonEvenMeasure: return "non_even_measure";
    case ErrorCode::NotRealKernel: return "not_real_kernel";
    case ErrorCode::NotHermitian: return "not_hermitian";
    case ErrorCode::MismatchedSystems: return "mismatched_systems";
    case ErrorCode::InternalConsistency: return "internal_consistency";
    case ErrorCode::Parse: return "parse_error";
  }
  return "unknown";
}

}  // namespace vgf
