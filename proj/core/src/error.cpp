//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/error.h"

namespace molgen {
std::string_view error_code_name(ErrorCode code) {
  switch (code) {
  case ErrorCode::kUnterminatedBracket:
    return "UnterminatedBracket";
  case ErrorCode::kUnmatchedRingClosure:
    return "UnmatchedRingClosure";
  case ErrorCode::kUnbalancedBranch:
    return "UnbalancedBranch";
  case ErrorCode::kValenceExceeded:
    return "ValenceExceeded";
  case ErrorCode::kSmilesSyntax:
    return "SmilesSyntax";
  case ErrorCode::kWidthMismatch:
    return "WidthMismatch";
  case ErrorCode::kShapeMismatch:
    return "ShapeMismatch";
  case ErrorCode::kNonScalarLoss:
    return "NonScalarLoss";
  case ErrorCode::kSequenceTooLong:
    return "SequenceTooLong";
  case ErrorCode::kUnknownTokenId:
    return "UnknownTokenId";
  case ErrorCode::kUnframedSequence:
    return "UnframedSequence";
  case ErrorCode::kVersionMismatch:
    return "VersionMismatch";
  case ErrorCode::kCorruptCheckpoint:
    return "CorruptCheckpoint";
  case ErrorCode::kTokenizeError:
    return "TokenizeError";
  case ErrorCode::kEmptyCorpus:
    return "EmptyCorpus";
  case ErrorCode::kDivergedLoss:
    return "DivergedLoss";
  case ErrorCode::kBudgetExhausted:
    return "BudgetExhausted";
  case ErrorCode::kUnknownOracle:
    return "UnknownOracle";
  case ErrorCode::kBadParameters:
    return "BadParameters";
  case ErrorCode::kEmptyLedger:
    return "EmptyLedger";
  case ErrorCode::kTooFewMolecules:
    return "TooFewMolecules";
  case ErrorCode::kUsageError:
    return "UsageError";
  case ErrorCode::kIoError:
    return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message, std::int64_t detail)
    : std::runtime_error(message), code_(code), detail_(detail) { }
}  // namespace molgen
