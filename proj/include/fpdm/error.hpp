// Copyright 2026 The FPDM Authors.
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

#ifndef FPDM_ERROR_HPP_
#define FPDM_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fpdm {

enum class ErrorCode {
  kInvalidArgument,
  kCycle,
  kDisconnected,
  kDuplicateParent,
  kNonContiguousIds,
  kInfeasibleProfile,
  kMissingValuation,
  kParse,
  kIo,
  kScopeTooLarge,
};

const char* to_string(ErrorCode code);

// All failures raised by the library carry one of the codes above so that the
// C boundary can translate them without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParse,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fpdm

#endif  // FPDM_ERROR_HPP_
