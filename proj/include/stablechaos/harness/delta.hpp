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

#ifndef STABLECHAOS_HARNESS_DELTA_HPP
#define STABLECHAOS_HARNESS_DELTA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "stablechaos/distributions.hpp"
#include "stablechaos/error.hpp"

namespace stablechaos::harness {

struct DeltaChoice {
  double delta = 0.0;
  double eta = 0.0;
  double C = 0.0;
  double predicted_rate_exponent = 0.0;
};

namespace detail {

constexpr double kBoundaryTolerance = 1e-9;

inline bool on(double x, double y) { return std::fabs(x - y) < kBoundaryTolerance; }

}  // namespace detail

/// Window length delta = N^-eta balancing the discretization error against
/// the stable-approximation error, with the predicted exponent of the coupled
/// error in N.
inline DeltaChoice choose_delta(double alpha, double gamma, std::size_t N) {
  validate_alpha(alpha);
  require(gamma > 0.0, ErrorCode::RangeError, "gamma must be positive");
  require(N >= 1, ErrorCode::RangeError, "N must be positive");
  require(!detail::on(alpha + gamma, 1.0) && !detail::on(alpha + gamma, 2.0), ErrorCode::UncoveredCase,
          "alpha + gamma must avoid {1, 2}");
  DeltaChoice out;
  if (alpha < 1.0) {
    out.C = std::min({gamma / alpha, (1.0 - alpha) / alpha, alpha / 2.0});
    out.eta = out.C / (1.0 + out.C);
    out.predicted_rate_exponent = -out.C / (1.0 + out.C);
  } else {
    const double a2 = alpha * alpha;
    const double half = alpha / 2.0;
    const double two = 2.0 - alpha;
    require(!detail::on(gamma, half) && !detail::on(gamma, two), ErrorCode::UncoveredCase,
            "gamma on a case boundary (alpha/2 or 2 - alpha)");
    if (gamma < std::min(half, two)) {
      out.C = gamma / alpha;
    } else if (gamma > half && gamma < two) {
      out.C = 0.5;
    } else if (gamma > two) {
      require(!detail::on(alpha, 4.0 / 3.0), ErrorCode::UncoveredCase, "alpha = 4/3 with gamma > 2 - alpha");
      out.C = alpha < 4.0 / 3.0 ? 0.5 : two / alpha;
    } else {
      throw Error(ErrorCode::UncoveredCase, "(alpha, gamma) outside the covered cases");
    }
    const double denom = 1.0 - alpha + out.C * a2 + a2;
    out.eta = out.C * a2 / denom;
    out.predicted_rate_exponent = -out.C / (denom * alpha);
  }
  require(out.eta > 0.0 && out.eta < 1.0, ErrorCode::UncoveredCase, "eta must lie in (0, 1)");
  out.delta = std::pow(static_cast<double>(N), -out.eta);
  return out;
}

}  // namespace stablechaos::harness

#endif  // STABLECHAOS_HARNESS_DELTA_HPP
