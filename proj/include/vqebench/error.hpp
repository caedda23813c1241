/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vqebench {

/// Machine-readable failure categories. The CLI reports these names verbatim
/// in its error manifest.
enum class ErrorCode {
  OddNodeCount,
  GenerationExhausted,
  InvalidGraph,
  LengthMismatch,
  IndexOutOfRange,
  ConvergenceFailure,
  SizeLimitExceeded,
  ParamLengthMismatch,
  BondDimensionExceeded,
  BadRadii,
  SessionConverged,
  MismatchedTell,
  EmptySample,
  BadGamma,
  ZeroReference,
  TooFewValues,
  BadCounts,
  NoExactReference,
  EmptySummary,
  EmptyRange,
  BadConfig,
  IncompleteExperiment,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::OddNodeCount: return "OddNodeCount";
  case ErrorCode::GenerationExhausted: return "GenerationExhausted";
  case ErrorCode::InvalidGraph: return "InvalidGraph";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
  case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
  case ErrorCode::SizeLimitExceeded: return "SizeLimitExceeded";
  case ErrorCode::ParamLengthMismatch: return "ParamLengthMismatch";
  case ErrorCode::BondDimensionExceeded: return "BondDimensionExceeded";
  case ErrorCode::BadRadii: return "BadRadii";
  case ErrorCode::SessionConverged: return "SessionConverged";
  case ErrorCode::MismatchedTell: return "MismatchedTell";
  case ErrorCode::EmptySample: return "EmptySample";
  case ErrorCode::BadGamma: return "BadGamma";
  case ErrorCode::ZeroReference: return "ZeroReference";
  case ErrorCode::TooFewValues: return "TooFewValues";
  case ErrorCode::BadCounts: return "BadCounts";
  case ErrorCode::NoExactReference: return "NoExactReference";
  case ErrorCode::EmptySummary: return "EmptySummary";
  case ErrorCode::EmptyRange: return "EmptyRange";
  case ErrorCode::BadConfig: return "BadConfig";
  case ErrorCode::IncompleteExperiment: return "IncompleteExperiment";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

namespace detail {
[[noreturn]] inline void fail(ErrorCode code, const std::string &what) {
  throw Error(code, what);
}
} // namespace detail

} // namespace vqebench
