// Copyright 2026 The Presque Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace presque {

enum class ErrorCode {
  kInvalidArgument,
  kNonDividingBeta,
  kMalformedExpression,
  kEmptyScope,
  kSpanOutOfBounds,
  kBackendUnavailable,
  kProtocolError,
  kGridMismatch,
  kDegenerateDistribution,
  kInventoryMismatch,
  kParseError,
  kValidationError,
  kUnknownQuantifier,
  kIoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonDividingBeta: return "NonDividingBeta";
    case ErrorCode::kMalformedExpression: return "MalformedExpression";
    case ErrorCode::kEmptyScope: return "EmptyScope";
    case ErrorCode::kSpanOutOfBounds: return "SpanOutOfBounds";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kDegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::kInventoryMismatch: return "InventoryMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kUnknownQuantifier: return "UnknownQuantifier";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

// All library failures are reported as Error; code() identifies the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal diagnostics (tie votes, degenerate distributions, ...). Tests and
// the CLI may replace the sink.
using WarningSink = std::function<void(std::string_view)>;

inline WarningSink& warning_sink() {
  static WarningSink sink = [](std::string_view msg) {
    std::cerr << "warning: " << msg << "\n";
  };
  return sink;
}

inline void warn(std::string_view msg) {
  if (warning_sink()) warning_sink()(msg);
}

}  // namespace presque
