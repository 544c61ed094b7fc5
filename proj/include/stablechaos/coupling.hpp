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

#ifndef STABLECHAOS_COUPLING_HPP
#define STABLECHAOS_COUPLING_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "stablechaos/distributions.hpp"
#include "stablechaos/error.hpp"
#include "stablechaos/limit_system.hpp"
#include "stablechaos/metrics.hpp"
#include "stablechaos/models.hpp"
#include "stablechaos/parallel.hpp"
#include "stablechaos/particle_system.hpp"
#include "stablechaos/rng.hpp"
#include "stablechaos/stable_process.hpp"

namespace stablechaos {

struct WindowSum {
  std::size_t P = 0;
  double sum_u = 0.0;
};

struct WindowVariable {
  std::size_t k = 0;
  std::size_t P = 0;
  double W = 0.0;
  bool fresh = false;
};

/// Per-window accepted counts and collateral sums, recomputed from the events.
inline std::vector<WindowSum> window_aggregate(const JumpLedger& ledger) {
  std::vector<WindowSum> out(ledger.windows.size());
  for (const auto& e : ledger.events) {
    if (!e.accepted) continue;
    auto& w = out[ledger.window_of(e.time)];
    ++w.P;
    w.sum_u += e.u;
  }
  return out;
}

/// W = sum_u / P^{1/alpha}, or a fresh draw from `spec` when the window is
/// empty.
inline WindowVariable normalized_window_variable(std::size_t P, double sum_u, double alpha, Stream& rng,
                                                 const StableSpec& spec) {
  WindowVariable v;
  v.P = P;
  if (P == 0) {
    v.W = sample_stable(spec, rng);
    v.fresh = true;
  } else {
    v.W = sum_u / std::pow(static_cast<double>(P), 1.0 / alpha);
  }
  return v;
}

/// The coupled driver: cell k of the output carries len_k^{1/alpha} W_k.
/// Fresh draws are taken from `rng` in window order.
inline DrivingPath build_coupled_driver(const JumpLedger& ledger, const CollateralLaw& law, double delta, Stream& rng,
                                        double K = kInfinity, std::vector<WindowVariable>* variables = nullptr) {
  require(std::fabs(ledger.delta - delta) <= 1e-12 * delta, ErrorCode::ConfigError,
          "ledger windows do not match delta");
  const double alpha = law.alpha();
  const StableSpec spec = law.limit();
  const auto sums = window_aggregate(ledger);
  std::vector<double> w(sums.size());
  if (variables != nullptr) variables->clear();
  for (std::size_t k = 0; k < sums.size(); ++k) {
    auto v = normalized_window_variable(sums[k].P, sums[k].sum_u, alpha, rng, spec);
    v.k = k;
    w[k] = v.W;
    if (variables != nullptr) variables->push_back(v);
  }
  return path_from_window_sums(w, delta, spec, ledger.horizon, K);
}

struct CouplingConfig {
  std::size_t N = 64;
  double delta = 0.1;
  double T = 1.0;
  double K = kInfinity;
  double alpha_minus = 0.0;  // distance exponent for alpha < 1
  std::size_t replications = 1;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
};

struct CouplingRow {
  double t = 0.0;
  double err_mean = 0.0;
  double err_se = 0.0;
  double err_censored_mean = 0.0;
  double censor_frac = 0.0;
};

/// Per observation time: error between the finite system and its coupled
/// limit system, averaged over particles within a replicate and then over
/// replicates. The pooled terminal positions of both systems are kept for
/// law-level comparisons.
struct CouplingReport {
  std::vector<CouplingRow> rows;
  std::size_t N = 0;
  double delta = 0.0;
  double K = kInfinity;
  double alpha = 0.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  std::size_t fresh_windows = 0;
  std::vector<double> terminal_finite;
  std::vector<double> terminal_limit;
};

inline std::vector<double> window_grid(double T, double delta) {
  const std::size_t cells = detail::cell_count(T, delta);
  std::vector<double> t(cells + 1);
  for (std::size_t k = 0; k < cells; ++k) t[k] = static_cast<double>(k) * delta;
  t[cells] = T;
  return t;
}

namespace detail {

struct CouplingReplicate {
  std::vector<double> err;  // per observation time, mean over particles
  double t_K = kInfinity;
  std::size_t fresh = 0;
  std::vector<double> terminal_finite;
  std::vector<double> terminal_limit;
};

inline CouplingReplicate coupling_replicate(const ModelSpec& model, const CollateralLaw& law,
                                            const CouplingConfig& cfg, std::span<const double> obs,
                                            std::uint32_t replicate) {
  const double alpha = law.alpha();
  const ReplicateStreams streams{cfg.master_seed, replicate};
  const auto in = draw_replicate_inputs(model, cfg.N, cfg.T, streams);
  auto collateral = streams.stream(Role::Collateral);
  const FiniteConfig fcfg{cfg.N, cfg.T, cfg.delta, 0.0};
  const auto finite = simulate_finite(model, law, fcfg, obs, in.initials, in.proposals, collateral);

  auto driver_rng = streams.stream(Role::Driver);
  std::vector<WindowVariable> vars;
  const auto path = build_coupled_driver(finite.ledger, law, cfg.delta, driver_rng, cfg.K, &vars);
  LimitConfig lcfg;
  lcfg.M = cfg.N;
  lcfg.K = cfg.K;
  const auto limit = simulate_limit(model, lcfg, path, in.initials, in.proposals, obs);

  CouplingReplicate out;
  out.t_K = path.t_K;
  for (const auto& v : vars) out.fresh += v.fresh ? 1 : 0;
  out.err.resize(obs.size());
  for (std::size_t ti = 0; ti < obs.size(); ++ti) {
    const auto a = finite.bundle.at(ti);
    const auto b = limit.at(ti);
    double acc = 0.0;
    for (std::size_t i = 0; i < cfg.N; ++i) {
      acc += alpha > 1.0 ? std::fabs(a[i] - b[i]) : dq_distance(a[i], b[i], cfg.alpha_minus);
    }
    out.err[ti] = acc / static_cast<double>(cfg.N);
  }
  const auto a = finite.bundle.at(obs.size() - 1);
  const auto b = limit.at(obs.size() - 1);
  out.terminal_finite.assign(a.begin(), a.end());
  out.terminal_limit.assign(b.begin(), b.end());
  return out;
}

}  // namespace detail

/// Runs the coupled finite-versus-limit experiment. Each replicate uses its
/// own counter-based streams and results are reduced in replicate order, so
/// the report does not depend on the thread count.
inline CouplingReport coupled_error_experiment(const ModelSpec& model, const CollateralLaw& law,
                                               const CouplingConfig& cfg) {
  const double alpha = law.alpha();
  require(cfg.replications >= 1, ErrorCode::ConfigError, "need at least one replication");
  require(cfg.N >= 2, ErrorCode::ConfigError, "need at least two particles");
  require(cfg.delta > 0.0 && cfg.delta <= cfg.T, ErrorCode::ConfigError, "need 0 < delta <= T");
  require(2.0 * cfg.delta * model.f_hi() < 1.0, ErrorCode::ConfigError, "need 2 delta f_hi < 1");
  require(alpha > 1.0 || (cfg.alpha_minus > 0.0 && cfg.alpha_minus < alpha), ErrorCode::ConfigError,
          "alpha < 1 needs 0 < alpha_minus < alpha");

  const auto obs = window_grid(cfg.T, cfg.delta);
  std::vector<detail::CouplingReplicate> reps(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    reps[r] = detail::coupling_replicate(model, law, cfg, obs, static_cast<std::uint32_t>(r));
  });

  CouplingReport report;
  report.N = cfg.N;
  report.delta = cfg.delta;
  report.K = cfg.K;
  report.alpha = alpha;
  report.gamma = law.gamma();
  report.seed = cfg.master_seed;
  report.replications = cfg.replications;
  const double R = static_cast<double>(cfg.replications);
  std::vector<double> column(cfg.replications);
  for (std::size_t ti = 0; ti < obs.size(); ++ti) {
    CouplingRow row;
    row.t = obs[ti];
    double censored = 0.0;
    double hit = 0.0;
    for (std::size_t r = 0; r < cfg.replications; ++r) {
      column[r] = reps[r].err[ti];
      if (obs[ti] < reps[r].t_K) {
        censored += reps[r].err[ti];
      } else {
        hit += 1.0;
      }
    }
    const auto ms = mean_and_se(column);
    row.err_mean = ms.mean;
    row.err_se = ms.se;
    row.err_censored_mean = censored / R;
    row.censor_frac = hit / R;
    report.rows.push_back(row);
  }
  for (const auto& rep : reps) {
    report.fresh_windows += rep.fresh;
    report.terminal_finite.insert(report.terminal_finite.end(), rep.terminal_finite.begin(),
                                  rep.terminal_finite.end());
    report.terminal_limit.insert(report.terminal_limit.end(), rep.terminal_limit.begin(), rep.terminal_limit.end());
  }
  return report;
}

inline void write_coupling_header(std::ostream& os) {
  os << "t,err_mean,err_se,err_censored_mean,censor_frac,N,delta,K,alpha,gamma,seed\n";
}

inline void write_coupling_rows(const CouplingReport& report, std::ostream& os) {
  const auto saved = os.precision(10);
  for (const auto& r : report.rows) {
    os << r.t << ',' << r.err_mean << ',' << r.err_se << ',' << r.err_censored_mean << ',' << r.censor_frac << ','
       << report.N << ',' << report.delta << ',' << report.K << ',' << report.alpha << ',' << report.gamma << ','
       << report.seed << '\n';
  }
  os.precision(saved);
}

}  // namespace stablechaos

#endif  // STABLECHAOS_COUPLING_HPP
