//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_ERROR_H_
#define MSAN_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace msan {

enum class ErrorCode {
  kEmptyInput,
  kUnmatchedRingBond,
  kUnbalancedParen,
  kUnknownAtomSymbol,
  kSyntaxError,
  kShapeMismatch,
  kEmptyBatch,
  kWidthMismatch,
  kEmptyPool,
  kUnknownDrugId,
  kMalformedRow,
  kSamplingExhausted,
  kIncompatibleCheckpoint,
  kConfigError,
  kIoError,
};

std::string_view error_name(ErrorCode code);

// All library failures surface as this exception; `code()` is stable and
// machine-readable, `what()` carries the human context (path, line, id).
class Error: public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) { }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace msan

#endif  // MSAN_ERROR_H_
