#include "common/error.hpp"

namespace sw {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kNoPath: return "no_path";
    case ErrorCode::kGeneration: return "generation";
    case ErrorCode::kNotReady: return "not_ready";
    case ErrorCode::kEmptySet: return "empty_set";
    case ErrorCode::kUndefinedDirection: return "undefined_direction";
    case ErrorCode::kDegenerateDisparity: return "degenerate_disparity";
    case ErrorCode::kEvaluation: return "evaluation";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace sw
