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

#ifndef STABLECHAOS_PARTICLE_SYSTEM_HPP
#define STABLECHAOS_PARTICLE_SYSTEM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "stablechaos/distributions.hpp"
#include "stablechaos/error.hpp"
#include "stablechaos/flow.hpp"
#include "stablechaos/models.hpp"
#include "stablechaos/rng.hpp"
#include "stablechaos/stable_process.hpp"

namespace stablechaos {

/// An atom of a particle's Poisson measure restricted to [0, T] x [0, f_hi]:
/// the particle fires at `time` iff mark <= f(X_{time-}).
struct Proposal {
  double time = 0.0;
  double mark = 0.0;
};
using ProposalList = std::vector<Proposal>;

/// Rate-f_hi proposal clock of one particle on [0, T].
inline ProposalList draw_proposals(double rate_bound, double T, Stream& rng) {
  ProposalList out;
  double t = rng.exponential(rate_bound);
  while (t <= T) {
    out.push_back({t, rng.uniform(0.0, rate_bound)});
    t += rng.exponential(rate_bound);
  }
  return out;
}

struct LedgerEvent {
  double time = 0.0;
  std::uint32_t particle = 0;
  bool accepted = false;
  double u = 0.0;
  bool main_jump = false;
};

struct WindowRecord {
  std::size_t k = 0;
  std::size_t P = 0;
  double sum_u = 0.0;
};

/// Event record of a finite-system run. Window k collects accepted events
/// with time in (k delta, (k+1) delta]; the last window may be shorter.
struct JumpLedger {
  double delta = 0.0;
  double horizon = 0.0;
  std::vector<LedgerEvent> events;
  std::vector<WindowRecord> windows;

  std::size_t window_of(double t) const {
    const auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(t / delta) - 1.0));
    return std::min(k, windows.size() - 1);
  }
};

/// Positions of all particles at the observation times (row-major, one row
/// per time).
struct TrajectoryBundle {
  std::vector<double> times;
  std::size_t particles = 0;
  std::vector<double> positions;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  std::span<const double> at(std::size_t time_index) const {
    return std::span<const double>(positions).subspan(time_index * particles, particles);
  }
  double position(std::size_t time_index, std::size_t particle) const {
    return positions[time_index * particles + particle];
  }
};

struct FiniteConfig {
  std::size_t N = 2;
  double T = 1.0;
  double delta = 0.1;
  double flow_step = 0.0;  // 0 selects min(delta, 0.01)

  double effective_flow_step() const { return flow_step > 0.0 ? flow_step : std::min(delta, 0.01); }
};

struct FiniteRun {
  TrajectoryBundle bundle;
  JumpLedger ledger;
};

namespace detail {

struct MergedProposal {
  double time;
  double mark;
  std::uint32_t particle;
};

inline std::vector<MergedProposal> merge_proposals(std::span<const ProposalList> lists) {
  std::vector<MergedProposal> all;
  std::size_t total = 0;
  for (const auto& l : lists) total += l.size();
  all.reserve(total);
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (const auto& p : lists[i]) all.push_back({p.time, p.mark, static_cast<std::uint32_t>(i)});
  }
  std::sort(all.begin(), all.end(), [](const MergedProposal& a, const MergedProposal& b) {
    return a.time < b.time || (a.time == b.time && a.particle < b.particle);
  });
  return all;
}

inline void check_obs_times(std::span<const double> obs_times, double T) {
  require(std::is_sorted(obs_times.begin(), obs_times.end()), ErrorCode::ConfigError,
          "observation times must be sorted");
  require(obs_times.empty() || (obs_times.front() >= 0.0 && obs_times.back() <= T + 1e-12),
          ErrorCode::ConfigError, "observation times must lie in [0, T]");
}

}  // namespace detail

/// Event-driven simulation of the N-particle system. The superposition of the
/// per-particle proposal clocks is processed in time order; between events
/// every particle follows the drift flow (RK4). On an accepted proposal of
/// particle i a collateral size u is drawn from `collateral`, particle i gets
/// its main jump (alpha < 1) and every other particle moves by u / N^{1/alpha}.
///
/// Positions are stored as y_j plus a shared offset holding all collateral
/// kicks, so a kick costs O(1): the firing particle compensates its own share.
inline FiniteRun simulate_finite(const ModelSpec& model, const CollateralLaw& law, const FiniteConfig& cfg,
                                 std::span<const double> obs_times, std::span<const double> initials,
                                 std::span<const ProposalList> proposals, Stream& collateral) {
  const double alpha = law.alpha();
  require(cfg.N >= 2, ErrorCode::ConfigError, "need at least two particles");
  require(cfg.delta > 0.0 && cfg.T > 0.0, ErrorCode::ConfigError, "need positive delta and T");
  require(2.0 * cfg.delta * model.f_hi() < 1.0, ErrorCode::ConfigError, "need 2 delta f_hi < 1");
  require(initials.size() == cfg.N && proposals.size() == cfg.N, ErrorCode::ConfigError,
          "one initial position and one proposal list per particle");
  detail::check_obs_times(obs_times, cfg.T);

  const double scale = std::pow(static_cast<double>(cfg.N), -1.0 / alpha);
  const bool main_jumps = alpha < 1.0 && model.has_kick();
  const double flow_step = cfg.effective_flow_step();

  FiniteRun run;
  auto& ledger = run.ledger;
  ledger.delta = cfg.delta;
  ledger.horizon = cfg.T;
  const std::size_t windows = detail::cell_count(cfg.T, cfg.delta);
  ledger.windows.resize(windows);
  for (std::size_t k = 0; k < windows; ++k) ledger.windows[k].k = k;

  auto& bundle = run.bundle;
  bundle.times.assign(obs_times.begin(), obs_times.end());
  bundle.particles = cfg.N;
  bundle.positions.reserve(obs_times.size() * cfg.N);

  std::vector<double> y(initials.begin(), initials.end());
  double offset = 0.0;
  double now = 0.0;
  detail::FlowWorkspace ws;
  detail::StageMeans live;
  std::size_t next_obs = 0;

  auto advance = [&](double t) {
    detail::flow(model, y, offset, t - now, flow_step, live, ws);
    now = t;
  };
  auto record = [&] {
    for (double v : y) bundle.positions.push_back(v + offset);
  };

  const auto events = detail::merge_proposals(proposals);
  ledger.events.reserve(events.size());
  for (const auto& ev : events) {
    if (ev.time > cfg.T) break;
    while (next_obs < obs_times.size() && obs_times[next_obs] < ev.time) {
      advance(obs_times[next_obs++]);
      record();
    }
    advance(ev.time);
    LedgerEvent entry{ev.time, ev.particle, false, 0.0, false};
    const double x = y[ev.particle] + offset;
    if (ev.mark <= model.rate(x)) {
      entry.accepted = true;
      entry.u = law.sample(collateral);
      if (main_jumps) {
        y[ev.particle] += model.kick(x);
        entry.main_jump = true;
      }
      offset += entry.u * scale;
      y[ev.particle] -= entry.u * scale;
      auto& w = ledger.windows[ledger.window_of(ev.time)];
      ++w.P;
      w.sum_u += entry.u;
    }
    ledger.events.push_back(entry);
  }
  while (next_obs < obs_times.size()) {
    advance(obs_times[next_obs++]);
    record();
  }
  return run;
}

/// Draws initials (one stream per particle), proposal clocks (one stream per
/// particle) and collateral sizes (one global stream) for a replicate.
struct ReplicateInputs {
  std::vector<double> initials;
  std::vector<ProposalList> proposals;
};

inline ReplicateInputs draw_replicate_inputs(const ModelSpec& model, std::size_t N, double T,
                                             const ReplicateStreams& streams) {
  ReplicateInputs in;
  in.initials.resize(N);
  in.proposals.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    auto init_rng = streams.stream(Role::Initial, static_cast<std::uint32_t>(i));
    in.initials[i] = sample_initial(model.nu0, init_rng);
    auto clock_rng = streams.stream(Role::Thinning, static_cast<std::uint32_t>(i));
    in.proposals[i] = draw_proposals(model.f_hi(), T, clock_rng);
  }
  return in;
}

inline FiniteRun simulate_finite(const ModelSpec& model, const CollateralLaw& law, const FiniteConfig& cfg,
                                 std::span<const double> obs_times, const ReplicateStreams& streams) {
  const auto in = draw_replicate_inputs(model, cfg.N, cfg.T, streams);
  auto collateral = streams.stream(Role::Collateral);
  auto run = simulate_finite(model, law, cfg, obs_times, in.initials, in.proposals, collateral);
  run.bundle.seed = streams.master_seed;
  return run;
}

/// A^N_t = N^{-1/alpha} * sum of accepted collateral sizes up to time t.
inline double interaction_term(const JumpLedger& ledger, double alpha, std::size_t N, double t) {
  require(t <= ledger.horizon + 1e-12, ErrorCode::RangeError, "t beyond the ledger horizon");
  double sum = 0.0;
  for (const auto& e : ledger.events) {
    if (e.time > t) break;
    if (e.accepted) sum += e.u;
  }
  return sum * std::pow(static_cast<double>(N), -1.0 / alpha);
}

/// CSV dump with columns t,i,x.
inline void write_trajectory_csv(const TrajectoryBundle& bundle, std::ostream& os) {
  os << "t,i,x\n";
  for (std::size_t k = 0; k < bundle.times.size(); ++k) {
    for (std::size_t i = 0; i < bundle.particles; ++i) {
      os << bundle.times[k] << ',' << i << ',' << bundle.position(k, i) << '\n';
    }
  }
}

/// CSV dump with columns time,particle,accepted,u.
inline void write_ledger_csv(const JumpLedger& ledger, std::ostream& os) {
  os << "time,particle,accepted,u\n";
  for (const auto& e : ledger.events) {
    os << e.time << ',' << e.particle << ',' << (e.accepted ? 1 : 0) << ',' << e.u << '\n';
  }
}

}  // namespace stablechaos

#endif  // STABLECHAOS_PARTICLE_SYSTEM_HPP
