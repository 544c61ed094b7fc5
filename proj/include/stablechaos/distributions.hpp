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

#ifndef STABLECHAOS_DISTRIBUTIONS_HPP
#define STABLECHAOS_DISTRIBUTIONS_HPP

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>

#include "stablechaos/error.hpp"
#include "stablechaos/rng.hpp"

namespace stablechaos {

/// How the distribution function is filled on (-L, L), where the two-tail
/// form leaves it unspecified.
enum class MiddleFill { AtomAtZero, UniformOnMiddle };

/// Heavy-tailed law in the strong domain of attraction of an alpha-stable law:
///   1 - G(x) = (1+beta) (A x^-alpha + A_tilde x^-(alpha+gamma)),   x >= L
///       G(x) = (1-beta) (A |x|^-alpha + A_tilde |x|^-(alpha+gamma)), x <= -L
/// Obtain instances through validate_heavy_tail().
struct HeavyTailSpec {
  double alpha = 0.5;
  double gamma = 0.5;
  double beta = 0.0;
  double A = 0.1;
  double A_tilde = 0.1;
  double L = 1.0;
  MiddleFill middle_fill = MiddleFill::AtomAtZero;
  bool centered = false;
};

/// Strictly alpha-stable law with Levy measure
///   a_plus z^-(1+alpha) dz on z > 0,  a_minus |z|^-(1+alpha) dz on z < 0.
struct StableSpec {
  double alpha = 1.5;
  double a_plus = 0.5;
  double a_minus = 0.5;

  double intensity() const { return a_plus + a_minus; }
  double beta_stable() const { return (a_plus - a_minus) / (a_plus + a_minus); }
  double sigma() const;
};

namespace detail {

constexpr double kIndexTolerance = 1e-12;

inline bool near(double x, double y) { return std::fabs(x - y) < kIndexTolerance; }

inline std::string describe(const HeavyTailSpec& s) {
  std::ostringstream os;
  os << "(alpha=" << s.alpha << ", gamma=" << s.gamma << ", beta=" << s.beta << ", A=" << s.A
     << ", A_tilde=" << s.A_tilde << ", L=" << s.L << ")";
  return os.str();
}

}  // namespace detail

/// C_alpha = (1 - alpha) / (Gamma(2 - alpha) cos(pi alpha / 2)), the tail
/// constant of the S_alpha(sigma, beta, 0) parametrization.
inline double stable_tail_constant(double alpha) {
  return (1.0 - alpha) / (std::tgamma(2.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0));
}

// x^alpha P(X > x) -> C_alpha (1+beta)/2 sigma^alpha and the Levy tail
// nu((x, inf)) = a_plus x^-alpha / alpha give sigma^alpha = (a_+ + a_-)/(alpha C_alpha).
inline double StableSpec::sigma() const {
  return std::pow(intensity() / (alpha * stable_tail_constant(alpha)), 1.0 / alpha);
}

inline void validate_alpha(double alpha) {
  require(alpha > 0.0 && alpha < 2.0, ErrorCode::RangeError, "alpha must lie in (0, 2)");
  require(!detail::near(alpha, 1.0), ErrorCode::ForbiddenIndex, "alpha = 1 is excluded");
}

inline StableSpec make_stable_spec(double alpha, double a_plus, double a_minus) {
  validate_alpha(alpha);
  require(a_plus >= 0.0 && a_minus >= 0.0, ErrorCode::RangeError, "a_plus, a_minus must be >= 0");
  require(a_plus + a_minus > 0.0, ErrorCode::RangeError, "a_plus and a_minus cannot both vanish");
  return StableSpec{alpha, a_plus, a_minus};
}

/// Checks every constraint of the heavy-tailed family; centering is forced on
/// for alpha > 1.
inline HeavyTailSpec validate_heavy_tail(const HeavyTailSpec& raw) {
  HeavyTailSpec s = raw;
  validate_alpha(s.alpha);
  require(s.gamma > 0.0, ErrorCode::RangeError, "gamma must be positive");
  require(!detail::near(s.alpha + s.gamma, 1.0) && !detail::near(s.alpha + s.gamma, 2.0),
          ErrorCode::ForbiddenIndex, "alpha + gamma must avoid {1, 2}");
  require(s.beta >= -1.0 && s.beta <= 1.0, ErrorCode::RangeError, "beta must lie in [-1, 1]");
  require(s.A > 0.0 && s.L > 0.0, ErrorCode::RangeError, "A and L must be positive");
  require(s.A_tilde >= 0.0, ErrorCode::RangeError, "A_tilde must be nonnegative");
  const double mass = std::pow(s.L, -s.alpha) * (s.A + std::pow(s.L, -s.gamma) * s.A_tilde);
  require(mass <= 0.5 + 1e-15, ErrorCode::MassConstraintViolated,
          "L^-alpha (A + L^-gamma A_tilde) = " + std::to_string(mass) + " exceeds 1/2 for " +
              detail::describe(s));
  if (s.alpha > 1.0) {
    s.centered = true;
  } else {
    require(!s.centered, ErrorCode::RangeError, "centering is only defined for alpha > 1");
  }
  return s;
}

/// Unnormalized two-term tail A y^-alpha + A_tilde y^-(alpha+gamma), y >= L.
inline double tail_shape(const HeavyTailSpec& s, double y) {
  return s.A * std::pow(y, -s.alpha) + s.A_tilde * std::pow(y, -s.alpha - s.gamma);
}

inline double tail_mass_plus(const HeavyTailSpec& s) { return (1.0 + s.beta) * tail_shape(s, s.L); }
inline double tail_mass_minus(const HeavyTailSpec& s) { return (1.0 - s.beta) * tail_shape(s, s.L); }

/// Distribution function of the uncentered law.
inline double heavy_cdf(const HeavyTailSpec& s, double x) {
  const double p_plus = tail_mass_plus(s);
  const double p_minus = tail_mass_minus(s);
  if (x >= s.L) return 1.0 - (1.0 + s.beta) * tail_shape(s, x);
  if (x <= -s.L) return (1.0 - s.beta) * tail_shape(s, -x);
  if (s.middle_fill == MiddleFill::AtomAtZero) return x < 0.0 ? p_minus : 1.0 - p_plus;
  return p_minus + (x + s.L) / (2.0 * s.L) * (1.0 - p_plus - p_minus);
}

/// Solves weight * tail_shape(y) = target for y >= L by safeguarded Newton
/// iteration in log y. Requires 0 < target <= weight * tail_shape(L).
inline double heavy_tail_inverse(const HeavyTailSpec& s, double weight, double target) {
  const double a = s.alpha;
  const double ag = s.alpha + s.gamma;
  const double log_target = std::log(target / weight);
  double lo = std::max(std::log(s.L), (std::log(s.A) - log_target) / a);
  double hi = std::max(lo, (std::log(s.A + s.A_tilde * std::pow(s.L, -s.gamma)) - log_target) / a);
  // Start from the A-term alone, which is the lower bracket.
  double t = lo;
  for (int iter = 0; iter < 200; ++iter) {
    const double ta = s.A * std::exp(-a * t);
    const double tg = s.A_tilde * std::exp(-ag * t);
    const double h = std::log(ta + tg) - log_target;
    if (h > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double dh = -(a * ta + ag * tg) / (ta + tg);
    double next = t - h / dh;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - t) <= 1e-13 * std::max(1.0, std::fabs(t)) || hi - lo <= 1e-14) {
      return std::exp(next);
    }
    t = next;
  }
  throw Error(ErrorCode::RootFindFailure, "tail inversion did not converge for " + detail::describe(s));
}

/// Quantile function of the uncentered law (generalized inverse of heavy_cdf).
inline double heavy_quantile(const HeavyTailSpec& s, double u) {
  const double p_plus = tail_mass_plus(s);
  const double p_minus = tail_mass_minus(s);
  if (u <= p_minus && p_minus > 0.0) return -heavy_tail_inverse(s, 1.0 - s.beta, u);
  if (u > 1.0 - p_plus && p_plus > 0.0) return heavy_tail_inverse(s, 1.0 + s.beta, 1.0 - u);
  if (s.middle_fill == MiddleFill::AtomAtZero) return 0.0;
  return -s.L + 2.0 * s.L * (u - p_minus) / (1.0 - p_plus - p_minus);
}

/// E[xi] of the uncentered law; finite only for alpha > 1. Both middle fills
/// are symmetric about zero and contribute nothing.
inline double heavy_mean(const HeavyTailSpec& s) {
  require(s.alpha > 1.0, ErrorCode::MomentUndefined, "the mean requires alpha > 1");
  const double a = s.alpha;
  const double ag = s.alpha + s.gamma;
  const double tail_moment = a * s.A / (a - 1.0) * std::pow(s.L, 1.0 - a) +
                             ag * s.A_tilde / (ag - 1.0) * std::pow(s.L, 1.0 - ag);
  return (1.0 + s.beta) * tail_moment - (1.0 - s.beta) * tail_moment;
}

/// One draw from the law without the centering shift.
inline double sample_heavy_uncentered(const HeavyTailSpec& s, Stream& rng) {
  const double p_plus = tail_mass_plus(s);
  const double p_minus = tail_mass_minus(s);
  const double u = rng.uniform();
  double x;
  if (u < p_minus) {
    x = -heavy_tail_inverse(s, 1.0 - s.beta, rng.uniform() * p_minus);
  } else if (u >= 1.0 - p_plus) {
    x = heavy_tail_inverse(s, 1.0 + s.beta, rng.uniform() * p_plus);
  } else if (s.middle_fill == MiddleFill::AtomAtZero) {
    x = 0.0;
  } else {
    x = rng.uniform(-s.L, s.L);
  }
  return x;
}

/// One draw from the law; centered draws are shifted by heavy_mean.
inline double sample_heavy(const HeavyTailSpec& s, Stream& rng) {
  const double x = sample_heavy_uncentered(s, rng);
  return s.centered ? x - heavy_mean(s) : x;
}

inline StableSpec stable_params_from_heavy(const HeavyTailSpec& s) {
  return make_stable_spec(s.alpha, (1.0 + s.beta) * s.alpha * s.A, (1.0 - s.beta) * s.alpha * s.A);
}

/// Chambers-Mallows-Stuck draw from S_alpha(sigma, beta, 0); strictly stable
/// for alpha != 1 and mean zero for alpha > 1.
inline double sample_stable(const StableSpec& spec, Stream& rng) {
  const double a = spec.alpha;
  const double beta = spec.beta_stable();
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double zeta = beta * std::tan(std::numbers::pi * a / 2.0);
  const double shift = std::atan(zeta) / a;
  const double scale = std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * a));
  const double x = scale * std::sin(a * (v + shift)) / std::pow(std::cos(v), 1.0 / a) *
                   std::pow(std::cos(v - a * (v + shift)) / w, (1.0 - a) / a);
  return spec.sigma() * x;
}

/// The law of the collateral jump sizes: a heavy-tailed law, or (exact mode)
/// a strictly stable law sampled directly.
struct CollateralLaw {
  std::variant<HeavyTailSpec, StableSpec> law;

  double alpha() const {
    return std::visit([](const auto& l) { return l.alpha; }, law);
  }
  bool exact() const { return std::holds_alternative<StableSpec>(law); }
  double gamma() const { return exact() ? 0.0 : std::get<HeavyTailSpec>(law).gamma; }

  /// Parameters of the stable limit of the normalized sums.
  StableSpec limit() const {
    if (exact()) return std::get<StableSpec>(law);
    return stable_params_from_heavy(std::get<HeavyTailSpec>(law));
  }

  double sample(Stream& rng) const {
    if (exact()) return sample_stable(std::get<StableSpec>(law), rng);
    return sample_heavy(std::get<HeavyTailSpec>(law), rng);
  }
};

}  // namespace stablechaos

#endif  // STABLECHAOS_DISTRIBUTIONS_HPP
