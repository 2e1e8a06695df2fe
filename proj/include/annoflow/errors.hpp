// Copyright 2026 The Annoflow Authors.
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

#ifndef ANNOFLOW_ERRORS_HPP_
#define ANNOFLOW_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

namespace annoflow {

// Broad error classes. They decide the CLI exit code and the HTTP status.
enum class ErrorKind {
  kValidation,  // bad input data or arguments
  kState,       // operation not legal in the current workflow stage
  kNotFound,    // referenced entity does not exist
  kIo,          // filesystem, network or provider failure
};

// Every failure raised by the library. `code` is a stable identifier such as
// "OverlappingSpans"; `detail` carries machine-readable context (ids, spans).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string &message,
        nlohmann::json detail = nullptr)
      : std::runtime_error(message),
        kind_(kind),
        code_(std::move(code)),
        detail_(std::move(detail)) {}

  ErrorKind kind() const { return kind_; }
  const std::string &code() const { return code_; }
  const nlohmann::json &detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string code_;
  nlohmann::json detail_;
};

inline Error validation_error(std::string code, const std::string &message,
                             nlohmann::json detail = nullptr) {
  return Error(ErrorKind::kValidation, std::move(code), message,
               std::move(detail));
}

inline Error state_error(std::string code, const std::string &message,
                        nlohmann::json detail = nullptr) {
  return Error(ErrorKind::kState, std::move(code), message, std::move(detail));
}

inline Error not_found_error(std::string code, const std::string &message,
                           nlohmann::json detail = nullptr) {
  return Error(ErrorKind::kNotFound, std::move(code), message,
               std::move(detail));
}

inline Error io_error(std::string code, const std::string &message,
                     nlohmann::json detail = nullptr) {
  return Error(ErrorKind::kIo, std::move(code), message, std::move(detail));
}

// CLI exit codes: 1 validation, 2 state, 3 I/O. Not-found counts as a
// validation failure of the caller's arguments.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation:
    case ErrorKind::kNotFound:
      return 1;
    case ErrorKind::kState:
      return 2;
    case ErrorKind::kIo:
      return 3;
  }
  return 1;
}

}  // namespace annoflow

#endif  // ANNOFLOW_ERRORS_HPP_
