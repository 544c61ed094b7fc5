/*
 * Copyright 2026 The stablechaos Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STABLECHAOS_ERROR_HPP
#define STABLECHAOS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace stablechaos {

enum class ErrorCode {
  MassConstraintViolated,
  ForbiddenIndex,
  RangeError,
  MomentUndefined,
  RootFindFailure,
  ConfigError,
  EmptyMeasure,
  EmptySample,
  DegenerateDesign,
  RegimeError,
  UncoveredCase,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MassConstraintViolated: return "MassConstraintViolated";
    case ErrorCode::ForbiddenIndex: return "ForbiddenIndex";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::MomentUndefined: return "MomentUndefined";
    case ErrorCode::RootFindFailure: return "RootFindFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::EmptyMeasure: return "EmptyMeasure";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::RegimeError: return "RegimeError";
    case ErrorCode::UncoveredCase: return "UncoveredCase";
  }
  return "Unknown";
}

/// Single exception type for the library; the code identifies the violated
/// contract and what() carries a human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace stablechaos

#endif  // STABLECHAOS_ERROR_HPP
