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

#ifndef STABLECHAOS_HARNESS_EXPERIMENTS_HPP
#define STABLECHAOS_HARNESS_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stablechaos/coupling.hpp"
#include "stablechaos/distributions.hpp"
#include "stablechaos/error.hpp"
#include "stablechaos/harness/config.hpp"
#include "stablechaos/harness/delta.hpp"
#include "stablechaos/metrics.hpp"
#include "stablechaos/models.hpp"
#include "stablechaos/parallel.hpp"
#include "stablechaos/rng.hpp"
#include "stablechaos/stable_process.hpp"

namespace stablechaos::harness {

inline constexpr const char* kVersion = "0.1.0";

/// Fixed-precision number formatting shared by every CSV.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline std::size_t resolve_threads(std::size_t requested) {
  return requested == 0 ? default_thread_count() : requested;
}

struct NPlan {
  std::size_t N = 0;
  DeltaChoice delta;
  double K = kInfinity;
};

inline std::vector<NPlan> plan_grid(const ExperimentConfig& cfg) {
  std::vector<NPlan> out;
  const StableSpec spec = cfg.stable();
  for (std::size_t N : cfg.N) {
    NPlan p;
    p.N = N;
    p.delta = choose_delta(cfg.alpha(), cfg.gamma(), N);
    if (cfg.eta) {
      p.delta.eta = *cfg.eta;
      p.delta.delta = std::pow(static_cast<double>(N), -*cfg.eta);
    }
    p.K = cfg.K ? *cfg.K : default_truncation_level(spec, cfg.T, cfg.censor_probability);
    out.push_back(p);
  }
  return out;
}

/// Cross-field checks, regime checks and the coefficient audit. Throws
/// ConfigError (or the more specific code of the failing check).
inline AuditReport validate_config(ExperimentConfig& cfg) {
  require(cfg.replications >= 1, ErrorCode::ConfigError, "replications must be at least 1");
  cfg.heavy = validate_heavy_tail(cfg.heavy);
  const double a = cfg.alpha();
  require(cfg.alpha_minus > 0.0 && cfg.alpha_minus < a && a < cfg.alpha_plus, ErrorCode::ConfigError,
          "need 0 < alpha_minus < alpha < alpha_plus");
  require(a < 1.0 || cfg.alpha_minus > 1.0, ErrorCode::ConfigError, "alpha > 1 needs alpha_minus > 1");
  require(cfg.T > 0.0, ErrorCode::ConfigError, "T must be positive");
  require(!cfg.K || *cfg.K > 0.0, ErrorCode::ConfigError, "K must be positive");
  require(cfg.censor_probability > 0.0 && cfg.censor_probability < 1.0, ErrorCode::ConfigError,
          "censor_probability must lie in (0, 1)");
  require(!cfg.eta || (*cfg.eta > 0.0 && *cfg.eta < 1.0), ErrorCode::ConfigError, "eta must lie in (0, 1)");
  cfg.model = validate_model(cfg.model, a);
  switch (cfg.experiment) {
    case Experiment::SelfSim:
      require(cfg.windows >= 1, ErrorCode::ConfigError, "selfsim.windows must be at least 1");
      require(cfg.poisson_mean > 0.0, ErrorCode::ConfigError, "selfsim.poisson_mean must be positive");
      break;
    case Experiment::CltRate:
      require(cfg.reference_size >= 1, ErrorCode::ConfigError, "clt.reference must be at least 1");
      for (auto n : cfg.clt_n) require(n >= 1, ErrorCode::ConfigError, "clt.n entries must be positive");
      break;
    case Experiment::CouplingSweep:
    case Experiment::ChaosTest:
      for (const auto& p : plan_grid(cfg)) {
        require(p.N >= 2, ErrorCode::ConfigError, "every N must be at least 2");
        require(p.delta.delta <= cfg.T, ErrorCode::ConfigError, "delta(N) exceeds T for N = " + std::to_string(p.N));
        require(2.0 * p.delta.delta * cfg.model.f_hi() < 1.0, ErrorCode::ConfigError,
                "2 delta(N) f_hi >= 1 for N = " + std::to_string(p.N));
      }
      break;
  }
  AuditOptions opt;
  opt.seed = cfg.master_seed;
  auto report = assumption_audit(cfg.model, cfg.alpha_minus, opt);
  if (!report.passed()) {
    std::string failed;
    for (const auto& c : report.checks) {
      if (!c.passed) failed += " " + c.name;
    }
    throw Error(ErrorCode::ConfigError, "coefficient audit failed:" + failed);
  }
  return report;
}

// ---------------------------------------------------------------- selfsim

struct SelfSimResult {
  double alpha = 0.0;
  std::size_t windows = 0;
  double poisson_mean = 0.0;
  std::size_t nonempty = 0;
  double ks_stat = 0.0;
  double ks_pvalue = 0.0;
  ChiSquareResult chi2;
  double rank_corr = 0.0;
};

/// Random-sum self-similarity: per window P ~ Pois(poisson_mean) collateral
/// sizes are summed and normalized as in the coupled driver.
inline SelfSimResult run_selfsim(const ExperimentConfig& cfg) {
  const CollateralLaw law = cfg.law();
  const StableSpec spec = law.limit();
  const double a = law.alpha();
  std::vector<double> P(cfg.windows), W(cfg.windows), ref(cfg.windows);
  std::vector<char> fresh(cfg.windows);
  parallel_for(cfg.windows, resolve_threads(cfg.threads), [&](std::size_t k) {
    Stream rng(cfg.master_seed, Role::Collateral, static_cast<std::uint32_t>(k), 0);
    const auto count = static_cast<std::size_t>(rng.poisson(cfg.poisson_mean));
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += law.sample(rng);
    Stream driver(cfg.master_seed, Role::Driver, static_cast<std::uint32_t>(k), 0);
    const auto v = normalized_window_variable(count, sum, a, driver, spec);
    P[k] = static_cast<double>(count);
    W[k] = v.W;
    fresh[k] = v.fresh ? 1 : 0;
    Stream reference(cfg.master_seed, Role::Reference, static_cast<std::uint32_t>(k), 0);
    ref[k] = sample_stable(spec, reference);
  });
  std::vector<double> nonempty_w, nonempty_ref;
  for (std::size_t k = 0; k < cfg.windows; ++k) {
    if (!fresh[k]) {
      nonempty_w.push_back(W[k]);
      nonempty_ref.push_back(ref[k]);
    }
  }
  SelfSimResult out;
  out.alpha = a;
  out.windows = cfg.windows;
  out.poisson_mean = cfg.poisson_mean;
  out.nonempty = nonempty_w.size();
  if (!nonempty_w.empty()) {
    out.ks_stat = ks_two_sample(nonempty_w, nonempty_ref);
    const double n = static_cast<double>(nonempty_w.size());
    out.ks_pvalue = ks_pvalue(out.ks_stat, n / 2.0);
  }
  out.chi2 = chi_square_independence(P, W, 4);
  out.rank_corr = spearman(P, W);
  return out;
}

inline void write_selfsim_csv(const SelfSimResult& r, std::uint64_t seed, std::ostream& os) {
  os << "alpha,windows,poisson_mean,nonempty,ks_stat,ks_pvalue,chi2_stat,chi2_dof,chi2_pvalue,rank_corr,seed\n";
  os << num(r.alpha) << ',' << r.windows << ',' << num(r.poisson_mean) << ',' << r.nonempty << ','
     << num(r.ks_stat) << ',' << num(r.ks_pvalue) << ',' << num(r.chi2.statistic) << ',' << num(r.chi2.dof)
     << ',' << num(r.chi2.p_value) << ',' << num(r.rank_corr) << ',' << seed << '\n';
}

// ---------------------------------------------------------------- clt-rate

struct CltRow {
  std::size_t n = 0;
  double distance = 0.0;
  double distance_se = std::numeric_limits<double>::quiet_NaN();
  double sample_distance = 0.0;
};

struct CltResult {
  double alpha = 0.0;
  double gamma = 0.0;
  std::string metric;
  std::size_t replications = 0;
  std::vector<CltRow> rows;
  SlopeFit fit;
  double predicted = 0.0;
};

/// Predicted exponent of the stable-CLT error in n.
inline double clt_predicted_exponent(double alpha, double gamma) {
  if (alpha > 1.0) return -std::min(gamma, 2.0 - alpha) / alpha;
  return std::max({-1.0, -gamma / alpha, (alpha - 1.0) / alpha});
}

/// Normalized sum n^{-1/alpha} S_n of an alpha < 1 heavy-tailed law together
/// with a strictly stable variable on the same probability space. Both are
/// built from one unit Poisson process Gamma_1 < Gamma_2 < ...: the order
/// statistics of n uniforms are Gamma_k / Gamma_{n+1}, which fix the sizes
/// of the summands in decreasing order, while the stable variable is the
/// series sum of (c / Gamma_k)^{1/alpha} with the same signs. Terms beyond n
/// are replaced by their mean and a matching Gaussian.
inline std::pair<double, double> series_coupled_sum(const HeavyTailSpec& h, std::size_t n, Stream& rng,
                                                    std::vector<double>& arrivals) {
  require(h.alpha < 1.0, ErrorCode::RegimeError, "the series coupling needs alpha < 1");
  const double a = h.alpha;
  const double c = 2.0 * h.A;
  const double p = 2.0 * tail_shape(h, h.L);
  const double p_plus = 0.5 * (1.0 + h.beta);
  arrivals.resize(n + 1);
  double acc = 0.0;
  for (auto& g : arrivals) {
    acc += rng.exponential();
    g = acc;
  }
  double x = 0.0;
  double y = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double sign = rng.uniform() < p_plus ? 1.0 : -1.0;
    const double v = arrivals[k] / arrivals[n];
    double size;
    if (v < p) {
      size = heavy_tail_inverse(h, 2.0, v);
    } else if (h.middle_fill == MiddleFill::AtomAtZero) {
      size = 0.0;
    } else {
      size = rng.uniform(0.0, h.L);
    }
    x += sign * size;
    y += sign * std::pow(c / arrivals[k], 1.0 / a);
  }
  x *= std::pow(static_cast<double>(n), -1.0 / a);
  const double gn = arrivals[n - 1];
  const double rest_mean = h.beta * std::pow(c, 1.0 / a) * std::pow(gn, 1.0 - 1.0 / a) / (1.0 / a - 1.0);
  const double rest_var = std::pow(c, 2.0 / a) * std::pow(gn, 1.0 - 2.0 / a) / (2.0 / a - 1.0);
  y += rest_mean + std::sqrt(rest_var) * rng.normal();
  return {x, y};
}

/// Stable-CLT rate. alpha > 1: W_1 between normalized sums and a stable
/// reference sample. alpha < 1: mean d_{alpha_-} gap under the series
/// coupling (an upper bound on W_{d_{alpha_-}}), with the monotone sample
/// estimator reported alongside.
inline CltResult run_clt_rate(const ExperimentConfig& cfg) {
  const HeavyTailSpec h = cfg.heavy;
  const StableSpec spec = stable_params_from_heavy(h);
  const double a = h.alpha;
  const std::size_t threads = resolve_threads(cfg.threads);
  Stream ref_rng(cfg.master_seed, Role::Reference, 0, 0);
  std::vector<double> ref(cfg.reference_size);
  for (auto& v : ref) v = sample_stable(spec, ref_rng);
  const EmpiricalSample reference(std::move(ref));
  const double shift = a > 1.0 ? heavy_mean(h) : 0.0;

  CltResult out;
  out.alpha = a;
  out.gamma = h.gamma;
  out.metric = a > 1.0 ? "w1" : "wdq_series_coupling";
  out.replications = cfg.replications;
  out.predicted = clt_predicted_exponent(a, h.gamma);
  std::vector<std::pair<double, double>> points;
  for (std::size_t j = 0; j < cfg.clt_n.size(); ++j) {
    const std::size_t n = cfg.clt_n[j];
    const double scale = std::pow(static_cast<double>(n), -1.0 / a);
    std::vector<double> sums(cfg.replications), gaps(cfg.replications);
    parallel_for(cfg.replications, threads, [&](std::size_t r) {
      Stream rng(cfg.master_seed, Role::Collateral, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(j));
      if (a > 1.0) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += sample_heavy_uncentered(h, rng) - shift;
        sums[r] = s * scale;
      } else {
        std::vector<double> arrivals;
        const auto [x, y] = series_coupled_sum(h, n, rng, arrivals);
        sums[r] = x;
        gaps[r] = dq_distance(x, y, cfg.alpha_minus);
      }
    });
    CltRow row;
    row.n = n;
    const EmpiricalSample sample(std::move(sums));
    if (a > 1.0) {
      row.distance = w1_empirical(sample, reference);
      row.sample_distance = row.distance;
    } else {
      const auto ms = mean_and_se(gaps);
      row.distance = ms.mean;
      row.distance_se = ms.se;
      row.sample_distance = wdq_upper(sample, reference, cfg.alpha_minus);
    }
    points.emplace_back(static_cast<double>(n), row.distance);
    out.rows.push_back(row);
  }
  if (points.size() >= 3) {
    out.fit = loglog_slope(points);
  } else {
    out.fit.slope = out.fit.standard_error = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

inline void write_clt_csv(const CltResult& r, std::uint64_t seed, std::ostream& os) {
  os << "n,replications,metric,distance,distance_se,sample_distance,alpha,gamma,seed\n";
  for (const auto& row : r.rows) {
    os << row.n << ',' << r.replications << ',' << r.metric << ',' << num(row.distance) << ','
       << num(row.distance_se) << ',' << num(row.sample_distance) << ',' << num(r.alpha) << ',' << num(r.gamma)
       << ',' << seed << '\n';
  }
}

inline void write_clt_summary_csv(const CltResult& r, std::ostream& os) {
  os << "metric,slope,slope_se,predicted,alpha,gamma\n";
  os << r.metric << ',' << num(r.fit.slope) << ',' << num(r.fit.standard_error) << ',' << num(r.predicted) << ','
     << num(r.alpha) << ',' << num(r.gamma) << '\n';
}

// ---------------------------------------------------------- coupling grid

struct GridEntry {
  NPlan plan;
  CouplingReport report;
};

inline std::vector<GridEntry> run_coupling_grid(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  std::vector<GridEntry> out;
  const CollateralLaw law = cfg.law();
  for (const auto& plan : plan_grid(cfg)) {
    CouplingConfig cc;
    cc.N = plan.N;
    cc.delta = plan.delta.delta;
    cc.T = cfg.T;
    cc.K = plan.K;
    cc.alpha_minus = cfg.alpha_minus;
    cc.replications = cfg.replications;
    cc.master_seed = cfg.master_seed;
    cc.threads = resolve_threads(cfg.threads);
    out.push_back({plan, coupled_error_experiment(cfg.model, law, cc)});
    if (log != nullptr) {
      const auto& last = out.back().report.rows.back();
      *log << "[" << to_string(cfg.experiment) << "] N=" << plan.N << " delta=" << num(plan.delta.delta)
           << " err(T)=" << num(last.err_mean) << " censored=" << num(last.err_censored_mean) << '\n';
    }
  }
  return out;
}

struct SweepSummaryRow {
  std::string quantity;
  double slope = 0.0;
  double slope_se = 0.0;
  double predicted = 0.0;
  bool strictly_decreasing = false;
};

namespace detail {

inline SweepSummaryRow fit_over_N(const std::string& name, const std::vector<std::pair<double, double>>& pts,
                                  double predicted) {
  SweepSummaryRow row;
  row.quantity = name;
  row.predicted = predicted;
  row.strictly_decreasing = true;
  for (std::size_t i = 1; i < pts.size(); ++i) row.strictly_decreasing &= pts[i].second < pts[i - 1].second;
  const bool positive = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second > 0.0; });
  if (pts.size() >= 3 && positive) {
    const auto fit = loglog_slope(pts);
    row.slope = fit.slope;
    row.slope_se = fit.standard_error;
  } else {
    row.slope = row.slope_se = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

}  // namespace detail

/// Slopes of the terminal errors against N, censored and uncensored.
inline std::vector<SweepSummaryRow> coupling_summary(const std::vector<GridEntry>& grid) {
  std::vector<std::pair<double, double>> censored, plain;
  for (const auto& g : grid) {
    const auto& last = g.report.rows.back();
    censored.emplace_back(static_cast<double>(g.plan.N), last.err_censored_mean);
    plain.emplace_back(static_cast<double>(g.plan.N), last.err_mean);
  }
  const double predicted = grid.empty() ? 0.0 : grid.front().plan.delta.predicted_rate_exponent;
  return {detail::fit_over_N("err_censored_at_T", censored, predicted),
          detail::fit_over_N("err_at_T", plain, predicted)};
}

inline void write_sweep_summary_csv(const std::vector<SweepSummaryRow>& rows, std::ostream& os) {
  os << "quantity,slope,slope_se,predicted,strictly_decreasing\n";
  for (const auto& r : rows) {
    os << r.quantity << ',' << num(r.slope) << ',' << num(r.slope_se) << ',' << num(r.predicted) << ','
       << (r.strictly_decreasing ? 1 : 0) << '\n';
  }
}

struct ChaosRow {
  std::size_t N = 0;
  double delta = 0.0;
  double K = 0.0;
  std::string metric;
  double distance = 0.0;
  double w1 = 0.0;
};

/// Law-level distance between the pooled terminal positions of the finite
/// system and of its coupled limit system.
inline std::vector<ChaosRow> chaos_rows(const std::vector<GridEntry>& grid, double alpha_minus) {
  std::vector<ChaosRow> out;
  for (const auto& g : grid) {
    ChaosRow row;
    row.N = g.plan.N;
    row.delta = g.plan.delta.delta;
    row.K = g.plan.K;
    const EmpiricalSample finite(g.report.terminal_finite);
    const EmpiricalSample limit(g.report.terminal_limit);
    row.w1 = w1_empirical(finite, limit);
    if (g.report.alpha > 1.0) {
      row.metric = "w1";
      row.distance = row.w1;
    } else {
      row.metric = "wdq_upper";
      row.distance = wdq_upper(finite, limit, alpha_minus);
    }
    out.push_back(row);
  }
  return out;
}

inline void write_chaos_csv(const std::vector<ChaosRow>& rows, std::size_t replications, std::uint64_t seed,
                            std::ostream& os) {
  os << "N,delta,K,replications,metric,distance,w1,seed\n";
  for (const auto& r : rows) {
    os << r.N << ',' << num(r.delta) << ',' << num(r.K) << ',' << replications << ',' << r.metric << ','
       << num(r.distance) << ',' << num(r.w1) << ',' << seed << '\n';
  }
}

inline SweepSummaryRow chaos_summary(const std::vector<ChaosRow>& rows, double predicted) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(static_cast<double>(r.N), r.distance);
  return detail::fit_over_N("terminal_law_distance", pts, predicted);
}

// ---------------------------------------------------------------- outputs

struct RunArtifacts {
  std::vector<std::string> files;
};

namespace detail {

inline std::string write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text,
                              RunArtifacts& artifacts) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::ConfigError, "cannot write " + path.string());
  out << text;
  artifacts.files.push_back(name);
  return text;
}

}  // namespace detail

/// Runs a validated experiment and writes its CSVs plus manifest.json into
/// cfg.output.
inline RunArtifacts run_and_write(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  const std::filesystem::path dir(cfg.output);
  std::filesystem::create_directories(dir);
  RunArtifacts artifacts;
  nlohmann::json file_hashes = nlohmann::json::object();
  auto emit = [&](const std::string& name, const std::string& text) {
    detail::write_file(dir, name, text, artifacts);
    file_hashes[name] = hex64(fnv1a(text));
  };
  switch (cfg.experiment) {
    case Experiment::SelfSim: {
      std::ostringstream os;
      write_selfsim_csv(run_selfsim(cfg), cfg.master_seed, os);
      emit("selfsim.csv", os.str());
      break;
    }
    case Experiment::CltRate: {
      const auto r = run_clt_rate(cfg);
      std::ostringstream rows, summary;
      write_clt_csv(r, cfg.master_seed, rows);
      write_clt_summary_csv(r, summary);
      emit("clt_rate.csv", rows.str());
      emit("clt_rate_summary.csv", summary.str());
      break;
    }
    case Experiment::CouplingSweep: {
      const auto grid = run_coupling_grid(cfg, log);
      std::ostringstream rows, summary;
      write_coupling_header(rows);
      for (const auto& g : grid) write_coupling_rows(g.report, rows);
      write_sweep_summary_csv(coupling_summary(grid), summary);
      emit("coupling_sweep.csv", rows.str());
      emit("coupling_sweep_summary.csv", summary.str());
      break;
    }
    case Experiment::ChaosTest: {
      const auto grid = run_coupling_grid(cfg, log);
      const auto rows = chaos_rows(grid, cfg.alpha_minus);
      std::ostringstream table, summary;
      write_chaos_csv(rows, cfg.replications, cfg.master_seed, table);
      const double predicted = grid.empty() ? 0.0 : grid.front().plan.delta.predicted_rate_exponent;
      write_sweep_summary_csv({chaos_summary(rows, predicted)}, summary);
      emit("chaos_test.csv", table.str());
      emit("chaos_test_summary.csv", summary.str());
      break;
    }
  }
  nlohmann::json manifest;
  manifest["tool"] = "stablechaos";
  manifest["version"] = kVersion;
  manifest["experiment"] = to_string(cfg.experiment);
  manifest["config_hash"] = hex64(cfg.hash);
  manifest["master_seed"] = cfg.master_seed;
  manifest["replications"] = cfg.replications;
  manifest["seed_scheme"] = "philox4x32-10 keyed by (master_seed, role); counter = (block, particle, replicate)";
  manifest["compiler"] = __VERSION__;
  manifest["files"] = file_hashes;
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : cfg.resolved) {
    if (!is_volatile_key(k)) config[k] = v;
  }
  manifest["config"] = config;
  emit("manifest.json", manifest.dump(2) + "\n");
  return artifacts;
}

}  // namespace stablechaos::harness

#endif  // STABLECHAOS_HARNESS_EXPERIMENTS_HPP
