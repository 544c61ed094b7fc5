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

#ifndef STABLECHAOS_FLOW_HPP
#define STABLECHAOS_FLOW_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stablechaos/models.hpp"

namespace stablechaos::detail {

// Supplies <tanh, mu> at each Runge-Kutta stage. Live mode computes it from
// the current stage (optionally recording it); replay mode returns values
// recorded by an earlier run, which is how Picard iterates freeze the law of
// the previous iterate.
class StageMeans {
 public:
  StageMeans() = default;

  static StageMeans recording(std::vector<double>& sink) {
    StageMeans s;
    s.record_ = &sink;
    return s;
  }
  static StageMeans replaying(const std::vector<double>& source) {
    StageMeans s;
    s.replay_ = &source;
    return s;
  }
  static StageMeans constant(double value) {
    StageMeans s;
    s.constant_ = value;
    s.use_constant_ = true;
    return s;
  }

  /// Also records the live stage means while returning replayed or constant
  /// ones.
  StageMeans& also_recording(std::vector<double>& sink) {
    record_ = &sink;
    return *this;
  }

  double next(std::span<const double> tanh_values) {
    if (record_ != nullptr) record_->push_back(order_invariant_mean(tanh_values, 1.0));
    if (replay_ != nullptr) return (*replay_)[cursor_++];
    if (use_constant_) return constant_;
    return record_ != nullptr ? record_->back() : order_invariant_mean(tanh_values, 1.0);
  }

 private:
  std::vector<double>* record_ = nullptr;
  const std::vector<double>* replay_ = nullptr;
  std::size_t cursor_ = 0;
  double constant_ = 0.0;
  bool use_constant_ = false;
};

struct FlowWorkspace {
  std::vector<double> th, k1, k2, k3, k4, stage;

  void resize(std::size_t n) {
    for (auto* v : {&th, &k1, &k2, &k3, &k4, &stage}) v->resize(n);
  }
};

// tanh through a single exp; absolute error below 1e-15.
inline double fast_tanh(double x) { return 1.0 - 2.0 / (std::exp(2.0 * x) + 1.0); }

// dy/dt = b(y + offset, mu) over one RK4 step of size h.
inline void rk4_step(const TanhDrift& drift, std::span<double> y, double offset, double h, StageMeans& means,
                     FlowWorkspace& ws) {
  const std::size_t n = y.size();
  ws.resize(n);
  auto eval = [&](std::span<const double> state, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) ws.th[i] = fast_tanh(state[i] + offset);
    const double common = drift.beta1 != 0.0 ? drift.beta1 * std::tanh(means.next(ws.th)) : 0.0;
    for (std::size_t i = 0; i < n; ++i) out[i] = -drift.beta0 * ws.th[i] + common;
  };
  eval(y, ws.k1);
  for (std::size_t i = 0; i < n; ++i) ws.stage[i] = y[i] + 0.5 * h * ws.k1[i];
  eval(ws.stage, ws.k2);
  for (std::size_t i = 0; i < n; ++i) ws.stage[i] = y[i] + 0.5 * h * ws.k2[i];
  eval(ws.stage, ws.k3);
  for (std::size_t i = 0; i < n; ++i) ws.stage[i] = y[i] + h * ws.k3[i];
  eval(ws.stage, ws.k4);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
  }
}

/// Integrates the between-jump flow over dt with equal substeps <= max_step.
inline void flow(const ModelSpec& model, std::span<double> y, double offset, double dt, double max_step,
                 StageMeans& means, FlowWorkspace& ws) {
  const auto* drift = std::get_if<TanhDrift>(&model.b);
  if (drift == nullptr || dt <= 0.0) return;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(dt / max_step - 1e-9)));
  const double h = dt / static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) rk4_step(*drift, y, offset, h, means, ws);
}

}  // namespace stablechaos::detail

#endif  // STABLECHAOS_FLOW_HPP
