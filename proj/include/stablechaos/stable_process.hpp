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

#ifndef STABLECHAOS_STABLE_PROCESS_HPP
#define STABLECHAOS_STABLE_PROCESS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "stablechaos/distributions.hpp"
#include "stablechaos/error.hpp"
#include "stablechaos/rng.hpp"

namespace stablechaos {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class PathMode { Sampled, CoupledFromLedger };

struct BigJump {
  double time = 0.0;
  double size = 0.0;
};

/// A driving alpha-stable path on a grid. Cell k covers
/// [k * grid_step, min((k + 1) * grid_step, horizon)].
///
/// increments[k] holds everything except the explicit big jumps, including
/// the deterministic compensation of the big jumps (alpha > 1), whose rate is
/// kept separately in big_jump_compensation so that truncated equations can
/// remove it.
struct DrivingPath {
  StableSpec spec;
  double horizon = 0.0;
  double grid_step = 0.0;
  std::vector<double> increments;
  std::vector<BigJump> big_jumps;
  double K = kInfinity;
  double t_K = kInfinity;
  PathMode mode = PathMode::Sampled;
  double big_jump_compensation = 0.0;
  double dropped_small_jump_mass = 0.0;

  std::size_t cells() const { return increments.size(); }
  double cell_start(std::size_t k) const { return static_cast<double>(k) * grid_step; }
  double cell_end(std::size_t k) const {
    return k + 1 == increments.size() ? horizon : std::min(horizon, static_cast<double>(k + 1) * grid_step);
  }
  double cell_length(std::size_t k) const { return cell_end(k) - cell_start(k); }

  /// Compensated small-jump part of cell k (big-jump compensation removed).
  double small_jump_increment(std::size_t k) const {
    return increments[k] - big_jump_compensation * cell_length(k);
  }

  /// Surrogate big-window test of coupled paths.
  bool is_big_window(std::size_t k) const {
    return std::fabs(increments[k]) > K * std::pow(cell_length(k), 1.0 / spec.alpha);
  }

  /// Path value at t, counting the cells that are complete by t and big jumps
  /// at times <= t. Exact at grid times.
  double value_at(double t) const {
    double v = 0.0;
    for (std::size_t k = 0; k < cells() && cell_end(k) <= t + 1e-12; ++k) v += increments[k];
    for (const auto& j : big_jumps) {
      if (j.time <= t) v += j.size;
    }
    return v;
  }
};

/// nu^alpha(|z| > K) = (a_+ + a_-) K^-alpha / alpha.
inline double big_jump_rate(const StableSpec& spec, double K) {
  require(K > 0.0, ErrorCode::RangeError, "truncation level must be positive");
  if (std::isinf(K)) return 0.0;
  return spec.intensity() * std::pow(K, -spec.alpha) / spec.alpha;
}

/// M_K = integral of z over |z| > K against nu^alpha.
inline double compensator_MK(const StableSpec& spec, double K) {
  require(spec.alpha > 1.0, ErrorCode::MomentUndefined, "M_K requires alpha > 1");
  require(K > 0.0, ErrorCode::RangeError, "truncation level must be positive");
  if (std::isinf(K)) return 0.0;
  return (spec.a_plus - spec.a_minus) * std::pow(K, 1.0 - spec.alpha) / (spec.alpha - 1.0);
}

/// Smallest K with 1 - exp(-big_jump_rate T) <= censor_probability.
inline double default_truncation_level(const StableSpec& spec, double T, double censor_probability = 0.01) {
  const double rate = -std::log1p(-censor_probability) / T;
  return std::pow(spec.intensity() / (spec.alpha * rate), 1.0 / spec.alpha);
}

namespace detail {

inline double draw_sign(const StableSpec& spec, Stream& rng) {
  return rng.uniform() * spec.intensity() < spec.a_plus ? 1.0 : -1.0;
}

inline std::size_t cell_count(double T, double step) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(T / step - 1e-9)));
}

}  // namespace detail

/// Samples a path by the Levy-Ito decomposition: explicit Poisson big jumps
/// (|z| > K), compound Poisson jumps on eps < |z| <= K per cell, and jumps
/// below eps replaced by their mean (alpha < 1) or compensating drift
/// (alpha > 1) plus a Gaussian term of matching variance. For alpha < 1 the
/// expected absolute mass of the replaced jumps is recorded.
inline DrivingPath sample_driving_path(const StableSpec& spec, double T, double step, double K, double eps,
                                       Stream& rng) {
  require(step > 0.0 && step <= T, ErrorCode::ConfigError, "need 0 < step <= T");
  require(eps > 0.0 && eps < K, ErrorCode::ConfigError, "need 0 < eps < K");
  const double a = spec.alpha;
  const double c = spec.intensity();

  DrivingPath path;
  path.spec = spec;
  path.horizon = T;
  path.grid_step = step;
  path.K = K;
  path.mode = PathMode::Sampled;

  const double rate = big_jump_rate(spec, K);
  if (rate > 0.0) {
    const auto count = rng.poisson(rate * T);
    for (std::uint64_t n = 0; n < count; ++n) {
      const double t = rng.uniform(0.0, T);
      const double size = K * std::pow(rng.uniform(), -1.0 / a);
      path.big_jumps.push_back({t, detail::draw_sign(spec, rng) * size});
    }
    std::sort(path.big_jumps.begin(), path.big_jumps.end(),
              [](const BigJump& x, const BigJump& y) { return x.time < y.time; });
    if (!path.big_jumps.empty()) path.t_K = path.big_jumps.front().time;
  }

  const double eps_pow = std::pow(eps, -a);
  const double k_pow = std::isinf(K) ? 0.0 : std::pow(K, -a);
  const double mid_rate = c * (eps_pow - k_pow) / a;
  double drift = 0.0;
  const double gauss_var = c * std::pow(eps, 2.0 - a) / (2.0 - a);
  if (a > 1.0) {
    path.big_jump_compensation = -compensator_MK(spec, K);
    const double k_lin = std::isinf(K) ? 0.0 : std::pow(K, 1.0 - a);
    drift = -(spec.a_plus - spec.a_minus) * (std::pow(eps, 1.0 - a) - k_lin) / (a - 1.0) +
            path.big_jump_compensation;
  } else {
    drift = (spec.a_plus - spec.a_minus) * std::pow(eps, 1.0 - a) / (1.0 - a);
    path.dropped_small_jump_mass = c * std::pow(eps, 1.0 - a) / (1.0 - a) * T;
  }

  const std::size_t cells = detail::cell_count(T, step);
  path.increments.assign(cells, 0.0);
  for (std::size_t k = 0; k < cells; ++k) {
    const double len = path.cell_length(k);
    double inc = drift * len;
    if (gauss_var > 0.0) inc += std::sqrt(gauss_var * len) * rng.normal();
    const auto jumps = rng.poisson(mid_rate * len);
    for (std::uint64_t n = 0; n < jumps; ++n) {
      const double magnitude = std::pow(eps_pow - rng.uniform() * (eps_pow - k_pow), -1.0 / a);
      inc += detail::draw_sign(spec, rng) * magnitude;
    }
    path.increments[k] = inc;
  }
  return path;
}

/// Grid-only path whose cell increments are len_k^{1/alpha} W_k. A window
/// with |increment| > K len_k^{1/alpha} (that is |W_k| > K) stands in for a
/// big jump; t_K is the end of the first such window.
inline DrivingPath path_from_window_sums(std::span<const double> window_vars, double delta,
                                         const StableSpec& spec, double horizon = 0.0, double K = kInfinity) {
  require(delta > 0.0, ErrorCode::ConfigError, "window length must be positive");
  DrivingPath path;
  path.spec = spec;
  path.grid_step = delta;
  path.horizon = horizon > 0.0 ? horizon : delta * static_cast<double>(window_vars.size());
  path.K = K;
  path.mode = PathMode::CoupledFromLedger;
  path.increments.assign(window_vars.size(), 0.0);
  for (std::size_t k = 0; k < window_vars.size(); ++k) {
    path.increments[k] = std::pow(path.cell_length(k), 1.0 / spec.alpha) * window_vars[k];
    if (std::isinf(path.t_K) && std::fabs(window_vars[k]) > K) path.t_K = path.cell_end(k);
  }
  return path;
}

/// CSV dump with columns t,value,is_big_jump.
inline void write_path_csv(const DrivingPath& path, std::ostream& os) {
  os << "t,value,is_big_jump\n";
  double value = 0.0;
  std::size_t j = 0;
  os << 0.0 << ',' << 0.0 << ",0\n";
  for (std::size_t k = 0; k < path.cells(); ++k) {
    while (j < path.big_jumps.size() && path.big_jumps[j].time <= path.cell_end(k)) {
      value += path.big_jumps[j].size;
      os << path.big_jumps[j].time << ',' << value << ",1\n";
      ++j;
    }
    value += path.increments[k];
    os << path.cell_end(k) << ',' << value << ",0\n";
  }
}

}  // namespace stablechaos

#endif  // STABLECHAOS_STABLE_PROCESS_HPP
