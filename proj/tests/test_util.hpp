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

#ifndef STABLECHAOS_TESTS_TEST_UTIL_HPP
#define STABLECHAOS_TESTS_TEST_UTIL_HPP

#include <gtest/gtest.h>

#include <string>

#include "stablechaos/error.hpp"

namespace sctest {

/// Runs fn and checks that it throws a library error with the given code.
template <class Fn>
::testing::AssertionResult throws_code(Fn&& fn, stablechaos::ErrorCode code) {
  try {
    fn();
  } catch (const stablechaos::Error& e) {
    if (e.code() == code) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "wrong code: " << e.what();
  }
  return ::testing::AssertionFailure() << "no exception for " << stablechaos::to_string(code);
}

}  // namespace sctest

#endif  // STABLECHAOS_TESTS_TEST_UTIL_HPP
