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

#ifndef STABLECHAOS_LIMIT_SYSTEM_HPP
#define STABLECHAOS_LIMIT_SYSTEM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "stablechaos/error.hpp"
#include "stablechaos/flow.hpp"
#include "stablechaos/models.hpp"
#include "stablechaos/particle_system.hpp"
#include "stablechaos/stable_process.hpp"

namespace stablechaos {

/// The conditional law of the limit system is replaced by the empirical
/// measure of M particles driven by one common path.
struct LimitConfig {
  std::size_t M = 2;
  double flow_step = 0.0;  // 0 selects min(grid step, 0.01)
  double K = kInfinity;
  std::size_t picard_iters = 0;

  double effective_flow_step(double grid_step) const {
    return flow_step > 0.0 ? flow_step : std::min(grid_step, 0.01);
  }
};

namespace detail {

inline bool same_time(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b)); }

inline double frozen_rate_factor(const ModelSpec& model, std::span<const double> x, double alpha,
                                 std::vector<double>& scratch) {
  scratch.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scratch[i] = model.rate(x[i]);
  return std::pow(order_invariant_mean(scratch, model.f_hi()), 1.0 / alpha);
}

}  // namespace detail

/// Simulates M particles of the limit system driven by `path`. Per cell:
/// main jumps by thinning the shared proposal clocks (alpha < 1 only), drift by
/// RK4 between events, then at the cell end the common increment
/// (mu_hat(f))^{1/alpha} * Delta S with mu_hat frozen at the cell start. Big
/// jumps of a sampled path are applied at their own times with the same
/// frozen factor.
inline TrajectoryBundle simulate_limit(const ModelSpec& model, const LimitConfig& cfg, const DrivingPath& path,
                                       std::span<const double> initials, std::span<const ProposalList> proposals,
                                       std::span<const double> obs_times) {
  const double alpha = path.spec.alpha;
  const bool main_jumps = alpha < 1.0 && model.has_kick();
  require(cfg.M >= 2, ErrorCode::ConfigError, "need at least two particles");
  require(initials.size() == cfg.M, ErrorCode::ConfigError, "one initial position per particle");
  require(!main_jumps || proposals.size() == cfg.M, ErrorCode::ConfigError,
          "main jumps need one proposal clock per particle");
  require(path.cells() > 0, ErrorCode::ConfigError, "empty driving path");
  detail::check_obs_times(obs_times, path.horizon);

  const double flow_step = cfg.effective_flow_step(path.grid_step);
  TrajectoryBundle bundle;
  bundle.times.assign(obs_times.begin(), obs_times.end());
  bundle.particles = cfg.M;
  bundle.positions.reserve(obs_times.size() * cfg.M);

  std::vector<double> x(initials.begin(), initials.end());
  std::vector<double> scratch;
  detail::FlowWorkspace ws;
  detail::StageMeans live;
  double now = 0.0;
  std::size_t next_obs = 0;
  auto advance = [&](double t) {
    detail::flow(model, x, 0.0, t - now, flow_step, live, ws);
    now = t;
  };
  auto record = [&] { bundle.positions.insert(bundle.positions.end(), x.begin(), x.end()); };

  while (next_obs < obs_times.size() && obs_times[next_obs] <= 0.0) {
    record();
    ++next_obs;
  }

  std::vector<detail::MergedProposal> events;
  if (main_jumps) events = detail::merge_proposals(proposals);
  std::size_t next_event = 0;
  std::size_t next_jump = 0;

  for (std::size_t k = 0; k < path.cells(); ++k) {
    const double t1 = path.cell_end(k);
    const double factor = detail::frozen_rate_factor(model, x, alpha, scratch);
    for (;;) {
      const double te = next_event < events.size() ? events[next_event].time : kInfinity;
      const double tj = next_jump < path.big_jumps.size() ? path.big_jumps[next_jump].time : kInfinity;
      const double to = next_obs < obs_times.size() && !detail::same_time(obs_times[next_obs], t1)
                            ? obs_times[next_obs]
                            : kInfinity;
      const double t = std::min({te, tj, to});
      if (t > t1) break;
      advance(t);
      if (t == to) {
        record();
        ++next_obs;
      } else if (t == te) {
        const auto& ev = events[next_event++];
        const double xi = x[ev.particle];
        if (ev.mark <= model.rate(xi)) x[ev.particle] += model.kick(xi);
      } else {
        const double size = path.big_jumps[next_jump++].size;
        for (auto& v : x) v += factor * size;
      }
    }
    advance(t1);
    const double common = factor * path.increments[k];
    for (auto& v : x) v += common;
    while (next_obs < obs_times.size() && detail::same_time(obs_times[next_obs], t1)) {
      record();
      ++next_obs;
    }
  }
  while (next_obs < obs_times.size()) {
    record();
    ++next_obs;
  }
  return bundle;
}

/// The path of the truncated equation: big jumps removed and, on coupled
/// paths, big windows (|W_k| > K) zeroed. The big-jump compensation -M_K
/// (alpha > 1) is kept as a drift.
inline DrivingPath truncated_path(const DrivingPath& path, double K) {
  DrivingPath out = path;
  out.big_jumps.clear();
  out.K = K;
  out.t_K = kInfinity;
  if (path.mode == PathMode::CoupledFromLedger) {
    const double comp = path.spec.alpha > 1.0 ? -compensator_MK(path.spec, K) : 0.0;
    out.big_jump_compensation = comp;
    for (std::size_t k = 0; k < out.cells(); ++k) {
      const double small = out.is_big_window(k) ? 0.0 : path.increments[k];
      out.increments[k] = small + comp * out.cell_length(k);
    }
  } else {
    require(path.K == K, ErrorCode::ConfigError, "a sampled path must be drawn with the same K");
  }
  return out;
}

struct PicardResult {
  TrajectoryBundle final_bundle;
  /// distances[n] = max over grid times of mean_i |X^{[n+1]}_i - X^{[n]}_i|,
  /// where X^{[0]} is the initial configuration held constant in time.
  std::vector<double> distances;
};

/// Picard iteration for the truncated limit equation (alpha > 1). Iterate n
/// moves M particles with the drift and the rate factor evaluated on the
/// empirical law of iterate n-1 (recorded stage by stage), the same truncated
/// path and the same initial positions. Iterate 0 is constant in time.
inline PicardResult picard_solve(const ModelSpec& model, const LimitConfig& cfg, const DrivingPath& path,
                                 std::span<const double> initials) {
  const double alpha = path.spec.alpha;
  require(alpha > 1.0, ErrorCode::RegimeError, "Picard mode covers alpha > 1 only");
  require(std::isfinite(cfg.K) && cfg.K > 0.0, ErrorCode::ConfigError, "Picard mode needs a finite K");
  require(cfg.picard_iters >= 1, ErrorCode::ConfigError, "need at least one Picard iterate");
  require(initials.size() == cfg.M && cfg.M >= 2, ErrorCode::ConfigError, "one initial position per particle");

  const DrivingPath trunc = truncated_path(path, cfg.K);
  const double flow_step = cfg.effective_flow_step(trunc.grid_step);
  const std::size_t cells = trunc.cells();
  const std::size_t M = cfg.M;

  // Law summaries of the previous iterate: stage means of tanh and rate
  // factors at cell starts.
  std::vector<double> prev_stage_means;
  std::vector<double> prev_factors(cells);
  std::vector<double> prev_grid(M * (cells + 1));
  std::vector<double> scratch;
  for (std::size_t g = 0; g <= cells; ++g) std::copy(initials.begin(), initials.end(), prev_grid.begin() + g * M);
  const double initial_tanh = mean_tanh(initials);
  const double initial_factor = detail::frozen_rate_factor(model, initials, alpha, scratch);
  std::fill(prev_factors.begin(), prev_factors.end(), initial_factor);

  PicardResult result;
  std::vector<double> grid(M * (cells + 1));
  std::vector<double> stage_means;
  std::vector<double> factors(cells);
  detail::FlowWorkspace ws;
  for (std::size_t n = 1; n <= cfg.picard_iters; ++n) {
    stage_means.clear();
    std::vector<double> x(initials.begin(), initials.end());
    std::copy(x.begin(), x.end(), grid.begin());
    detail::StageMeans source = n == 1 ? detail::StageMeans::constant(initial_tanh)
                                       : detail::StageMeans::replaying(prev_stage_means);
    source.also_recording(stage_means);
    for (std::size_t k = 0; k < cells; ++k) {
      factors[k] = detail::frozen_rate_factor(model, x, alpha, scratch);
      detail::flow(model, x, 0.0, trunc.cell_length(k), flow_step, source, ws);
      const double common = prev_factors[k] * trunc.increments[k];
      for (auto& v : x) v += common;
      std::copy(x.begin(), x.end(), grid.begin() + (k + 1) * M);
    }
    double gap = 0.0;
    for (std::size_t g = 0; g <= cells; ++g) {
      double acc = 0.0;
      for (std::size_t i = 0; i < M; ++i) acc += std::fabs(grid[g * M + i] - prev_grid[g * M + i]);
      gap = std::max(gap, acc / static_cast<double>(M));
    }
    result.distances.push_back(gap);
    prev_grid.swap(grid);
    prev_factors = factors;
    prev_stage_means = stage_means;
  }
  result.final_bundle.particles = M;
  result.final_bundle.positions = prev_grid;
  for (std::size_t g = 0; g <= cells; ++g) {
    result.final_bundle.times.push_back(g == 0 ? 0.0 : trunc.cell_end(g - 1));
  }
  return result;
}

}  // namespace stablechaos

#endif  // STABLECHAOS_LIMIT_SYSTEM_HPP
