// Copyright (c) the hodr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hodr {

enum class ErrorCode {
  kFileNotFound,
  kUnreadableFile,
  kUnsupportedFormat,
  kUnwritablePath,
  kInvalidArgument,
  kOutOfRange,
  kDimensionMismatch,
  kSchemaViolation,
  kDegenerateInput,
  kNoModelLoaded,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "file not found";
    case ErrorCode::kUnreadableFile: return "unreadable file";
    case ErrorCode::kUnsupportedFormat: return "unsupported format";
    case ErrorCode::kUnwritablePath: return "unwritable path";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kSchemaViolation: return "schema violation";
    case ErrorCode::kDegenerateInput: return "degenerate input";
    case ErrorCode::kNoModelLoaded: return "no model loaded";
  }
  return "unknown error";
}

// Every failure in the library surfaces as an Error carrying a code, so
// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hodr
