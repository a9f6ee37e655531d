//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/error.h"

namespace msan {

std::string_view error_name(ErrorCode code) {
  switch (code) {
  case ErrorCode::kEmptyInput:
    return "EmptyInput";
  case ErrorCode::kUnmatchedRingBond:
    return "UnmatchedRingBond";
  case ErrorCode::kUnbalancedParen:
    return "UnbalancedParen";
  case ErrorCode::kUnknownAtomSymbol:
    return "UnknownAtomSymbol";
  case ErrorCode::kSyntaxError:
    return "SyntaxError";
  case ErrorCode::kShapeMismatch:
    return "ShapeMismatch";
  case ErrorCode::kEmptyBatch:
    return "EmptyBatch";
  case ErrorCode::kWidthMismatch:
    return "WidthMismatch";
  case ErrorCode::kEmptyPool:
    return "EmptyPool";
  case ErrorCode::kUnknownDrugId:
    return "UnknownDrugId";
  case ErrorCode::kMalformedRow:
    return "MalformedRow";
  case ErrorCode::kSamplingExhausted:
    return "SamplingExhausted";
  case ErrorCode::kIncompatibleCheckpoint:
    return "IncompatibleCheckpoint";
  case ErrorCode::kConfigError:
    return "ConfigError";
  case ErrorCode::kIoError:
    return "IoError";
  }
  return "Unknown";
}

}  // namespace msan
