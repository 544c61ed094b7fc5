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

#ifndef STABLECHAOS_MODELS_HPP
#define STABLECHAOS_MODELS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "stablechaos/error.hpp"
#include "stablechaos/metrics.hpp"
#include "stablechaos/rng.hpp"

namespace stablechaos {

// Coefficient families. The measure enters only through <tanh, mu>.
struct ZeroDrift {};
/// b(x, mu) = -beta0 tanh(x) + beta1 tanh(<tanh, mu>)
struct TanhDrift {
  double beta0 = 1.0;
  double beta1 = 0.0;
};

struct ConstantRate {
  double c = 1.0;
};
/// f(x) = lo + (hi - lo) / (1 + e^-x)
struct LogisticRate {
  double lo = 0.5;
  double hi = 1.5;
};

struct ZeroKick {};
/// psi(x, mu) = -c
struct ConstantKick {
  double c = 0.0;
};
/// psi(x, mu) = -c tanh(x)
struct TanhKick {
  double c = 0.0;
};

struct PointMass {
  double x0 = 0.0;
};
struct GaussianLaw {
  double mean = 0.0;
  double sd = 1.0;
};
struct UniformLaw {
  double a = 0.0;
  double b = 1.0;
};

using DriftFamily = std::variant<ZeroDrift, TanhDrift>;
using RateFamily = std::variant<ConstantRate, LogisticRate>;
using KickFamily = std::variant<ZeroKick, ConstantKick, TanhKick>;
using InitialLaw = std::variant<PointMass, GaussianLaw, UniformLaw>;

struct ModelSpec {
  DriftFamily b = ZeroDrift{};
  RateFamily f = ConstantRate{};
  KickFamily psi = ZeroKick{};
  InitialLaw nu0 = PointMass{};

  double f_lo() const {
    return std::visit(
        [](const auto& r) {
          if constexpr (std::is_same_v<std::decay_t<decltype(r)>, ConstantRate>) return r.c;
          else return r.lo;
        },
        f);
  }
  double f_hi() const {
    return std::visit(
        [](const auto& r) {
          if constexpr (std::is_same_v<std::decay_t<decltype(r)>, ConstantRate>) return r.c;
          else return r.hi;
        },
        f);
  }

  bool has_drift() const { return std::holds_alternative<TanhDrift>(b); }
  bool drift_depends_on_measure() const {
    return has_drift() && std::get<TanhDrift>(b).beta1 != 0.0;
  }
  bool has_kick() const { return !std::holds_alternative<ZeroKick>(psi); }

  double drift(double x, double mean_tanh) const {
    if (const auto* d = std::get_if<TanhDrift>(&b)) {
      return -d->beta0 * std::tanh(x) + d->beta1 * std::tanh(mean_tanh);
    }
    return 0.0;
  }

  double rate(double x) const {
    if (const auto* r = std::get_if<LogisticRate>(&f)) return r->lo + (r->hi - r->lo) / (1.0 + std::exp(-x));
    return std::get<ConstantRate>(f).c;
  }

  double kick(double x) const {
    if (const auto* k = std::get_if<ConstantKick>(&psi)) return -k->c;
    if (const auto* k = std::get_if<TanhKick>(&psi)) return -k->c * std::tanh(x);
    return 0.0;
  }
};

/// Checks the structural constraints; main jumps are switched off for
/// alpha > 1.
inline ModelSpec validate_model(ModelSpec spec, double alpha) {
  require(spec.f_lo() > 0.0, ErrorCode::ConfigError, "the jump rate must be bounded below by a positive constant");
  require(spec.f_hi() >= spec.f_lo(), ErrorCode::ConfigError, "logistic rate needs hi >= lo");
  if (const auto* g = std::get_if<GaussianLaw>(&spec.nu0)) {
    require(g->sd > 0.0, ErrorCode::ConfigError, "initial Gaussian needs sd > 0");
  }
  if (const auto* u = std::get_if<UniformLaw>(&spec.nu0)) {
    require(u->b > u->a, ErrorCode::ConfigError, "initial uniform needs b > a");
  }
  if (alpha > 1.0) spec.psi = ZeroKick{};
  return spec;
}

inline double sample_initial(const InitialLaw& law, Stream& rng) {
  if (const auto* p = std::get_if<PointMass>(&law)) return p->x0;
  if (const auto* g = std::get_if<GaussianLaw>(&law)) return g->mean + g->sd * rng.normal();
  const auto& u = std::get<UniformLaw>(law);
  return rng.uniform(u.a, u.b);
}

/// Mean of values bounded by |v| <= bound, accumulated in 2^-62 fixed point so
/// the result does not depend on the summation order.
inline double order_invariant_mean(std::span<const double> values, double bound) {
  if (values.empty()) return 0.0;
  const double scale = 0x1.0p62 / bound;
  __extension__ __int128 acc = 0;
  for (double v : values) acc += static_cast<std::int64_t>(v * scale);
  return static_cast<double>(acc) / scale / static_cast<double>(values.size());
}

inline double mean_tanh(std::span<const double> xs) {
  thread_local std::vector<double> scratch;
  scratch.resize(xs.size());
  std::transform(xs.begin(), xs.end(), scratch.begin(), [](double x) { return std::tanh(x); });
  return order_invariant_mean(scratch, 1.0);
}

enum class Component { b, f, psi };

inline double eval_component(const ModelSpec& spec, Component which, double x, std::span<const double> mu) {
  switch (which) {
    case Component::b:
      if (!spec.drift_depends_on_measure()) return spec.drift(x, 0.0);
      require(!mu.empty(), ErrorCode::EmptyMeasure, "drift depends on the measure; got an empty one");
      return spec.drift(x, mean_tanh(mu));
    case Component::f:
      return spec.rate(x);
    case Component::psi:
      return spec.kick(x);
  }
  return 0.0;
}

/// Arbitrary coefficient functions for the audit; registry models convert
/// through coefficients_of().
struct CoefficientSet {
  std::function<double(double, std::span<const double>)> b;
  std::function<double(double)> f;
  std::function<double(double, std::span<const double>)> psi;
};

inline CoefficientSet coefficients_of(const ModelSpec& spec) {
  return {
      [spec](double x, std::span<const double> mu) { return eval_component(spec, Component::b, x, mu); },
      [spec](double x) { return spec.rate(x); },
      [spec](double x, std::span<const double> mu) { return eval_component(spec, Component::psi, x, mu); },
  };
}

struct AuditCheck {
  std::string name;
  double value = 0.0;
  bool passed = true;
};

struct AuditReport {
  std::vector<AuditCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
  }
  const AuditCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

struct AuditOptions {
  std::size_t grid_points = 10000;
  double radius = 10.0;
  std::size_t measure_pairs = 100;
  std::size_t measure_size = 32;
  std::uint64_t seed = 20260101;
};

namespace detail {

struct GridStats {
  double sup = 0.0;
  double inf = std::numeric_limits<double>::infinity();
  double lipschitz = 0.0;
};

inline GridStats scan(const std::function<double(double)>& g, double radius, std::size_t points) {
  GridStats s;
  const double h = 2.0 * radius / static_cast<double>(points - 1);
  double prev = g(-radius);
  s.sup = std::fabs(prev);
  s.inf = prev;
  for (std::size_t i = 1; i < points; ++i) {
    const double v = g(-radius + h * static_cast<double>(i));
    s.sup = std::max(s.sup, std::fabs(v));
    s.inf = std::min(s.inf, v);
    s.lipschitz = std::max(s.lipschitz, std::fabs(v - prev) / h);
    prev = v;
  }
  return s;
}

}  // namespace detail

/// Numerical check of boundedness, Lipschitz continuity, the positive lower
/// bound of f and the d_{alpha_minus} / W_{d_{alpha_minus}} Lipschitz property
/// of b and psi. Report-only: never throws for a bad model.
inline AuditReport assumption_audit(const CoefficientSet& coeffs, double alpha_minus,
                                    const AuditOptions& opt = {}) {
  AuditReport report;
  Stream rng(opt.seed, Role::Aux, 0, 0);
  std::vector<double> reference(opt.measure_size);
  for (auto& v : reference) v = rng.normal();

  auto add = [&report](std::string name, double value, bool ok) {
    report.checks.push_back({std::move(name), value, ok});
  };
  auto bounded_check = [&](const std::string& label, const std::function<double(double)>& g) {
    const auto near_stats = detail::scan(g, opt.radius, opt.grid_points);
    const auto far_stats = detail::scan(g, 10.0 * opt.radius, opt.grid_points);
    const bool bounded = std::isfinite(far_stats.sup) && far_stats.sup <= 1.05 * near_stats.sup + 1e-12;
    add(label + ".sup", near_stats.sup, bounded);
    add(label + ".lipschitz", near_stats.lipschitz, std::isfinite(near_stats.lipschitz));
    return near_stats;
  };

  const auto b_x = [&](double x) { return coeffs.b(x, reference); };
  const auto psi_x = [&](double x) { return coeffs.psi(x, reference); };
  const auto b_stats = bounded_check("b", b_x);
  const auto f_stats = bounded_check("f", coeffs.f);
  const auto psi_stats = bounded_check("psi", psi_x);
  add("f.lower_bound", f_stats.inf, f_stats.inf > 0.0);

  // d_q(x, y) = |x - y| for |x - y| <= 1, and 2 sup |g| covers larger gaps.
  add("b.dq_lipschitz", std::max(b_stats.lipschitz, 2.0 * b_stats.sup), std::isfinite(b_stats.sup));
  add("psi.dq_lipschitz", std::max(psi_stats.lipschitz, 2.0 * psi_stats.sup), std::isfinite(psi_stats.sup));

  // Measure argument: ratio of coefficient gaps to transport distances.
  double b_w1 = 0.0, b_wdq = 0.0, psi_w1 = 0.0, psi_wdq = 0.0;
  std::vector<double> mu(opt.measure_size), nu(opt.measure_size);
  for (std::size_t pair = 0; pair < opt.measure_pairs; ++pair) {
    const double m1 = rng.uniform(-3.0, 3.0), s1 = rng.uniform(0.1, 3.0);
    const double m2 = rng.uniform(-3.0, 3.0), s2 = rng.uniform(0.1, 3.0);
    for (auto& v : mu) v = m1 + s1 * rng.normal();
    for (auto& v : nu) v = m2 + s2 * rng.normal();
    const double w1 = wp_empirical(mu, nu, 1.0);
    const double wdq = wdq_upper(mu, nu, std::min(alpha_minus, 1.0));
    const double x = rng.uniform(-opt.radius, opt.radius);
    const double db = std::fabs(coeffs.b(x, mu) - coeffs.b(x, nu));
    const double dpsi = std::fabs(coeffs.psi(x, mu) - coeffs.psi(x, nu));
    if (w1 > 0.0) {
      b_w1 = std::max(b_w1, db / w1);
      psi_w1 = std::max(psi_w1, dpsi / w1);
    }
    if (wdq > 0.0) {
      b_wdq = std::max(b_wdq, db / wdq);
      psi_wdq = std::max(psi_wdq, dpsi / wdq);
    }
  }
  add("b.w1_lipschitz", b_w1, std::isfinite(b_w1));
  add("b.wdq_lipschitz", b_wdq, std::isfinite(b_wdq));
  add("psi.w1_lipschitz", psi_w1, std::isfinite(psi_w1));
  add("psi.wdq_lipschitz", psi_wdq, std::isfinite(psi_wdq));
  return report;
}

inline AuditReport assumption_audit(const ModelSpec& spec, double alpha_minus, const AuditOptions& opt = {}) {
  return assumption_audit(coefficients_of(spec), alpha_minus, opt);
}

}  // namespace stablechaos

#endif  // STABLECHAOS_MODELS_HPP
