//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_ERROR_H_
#define MOLGEN_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace molgen {
enum class ErrorCode {
  kUnterminatedBracket,
  kUnmatchedRingClosure,
  kUnbalancedBranch,
  kValenceExceeded,
  kSmilesSyntax,
  kWidthMismatch,
  kShapeMismatch,
  kNonScalarLoss,
  kSequenceTooLong,
  kUnknownTokenId,
  kUnframedSequence,
  kVersionMismatch,
  kCorruptCheckpoint,
  kTokenizeError,
  kEmptyCorpus,
  kDivergedLoss,
  kBudgetExhausted,
  kUnknownOracle,
  kBadParameters,
  kEmptyLedger,
  kTooFewMolecules,
  kUsageError,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

/// Base exception for every recoverable failure in the library. `detail` is
/// an error-specific location (atom index, corpus line, ...) or -1.
class Error: public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message, std::int64_t detail = -1);

  ErrorCode code() const noexcept { return code_; }
  std::int64_t detail() const noexcept { return detail_; }

private:
  ErrorCode code_;
  std::int64_t detail_;
};
}  // namespace molgen

#endif  // MOLGEN_ERROR_H_
