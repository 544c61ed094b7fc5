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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "stablechaos/distributions.hpp"
#include "stablechaos/metrics.hpp"
#include "stablechaos/stable_process.hpp"
#include "test_util.hpp"

namespace sc = stablechaos;

TEST(BigJumpRate, Examples) {
  EXPECT_NEAR(sc::big_jump_rate(sc::make_stable_spec(1.5, 0.3, 0.3), 10.0), 0.0126491, 1e-7);
  EXPECT_DOUBLE_EQ(sc::big_jump_rate(sc::make_stable_spec(0.5, 1.0, 1.0), 1.0), 4.0);
  EXPECT_EQ(sc::big_jump_rate(sc::make_stable_spec(1.5, 0.3, 0.3), sc::kInfinity), 0.0);
  EXPECT_LT(sc::big_jump_rate(sc::make_stable_spec(1.5, 0.3, 0.3), 1e12), 1e-17);
}

TEST(CompensatorMK, Examples) {
  EXPECT_DOUBLE_EQ(sc::compensator_MK(sc::make_stable_spec(1.5, 0.3, 0.3), 2.0), 0.0);
  EXPECT_NEAR(sc::compensator_MK(sc::make_stable_spec(1.5, 0.3, 0.1), 2.0), 0.282843, 1e-6);
  EXPECT_TRUE(sctest::throws_code([] { (void)sc::compensator_MK(sc::make_stable_spec(0.5, 0.3, 0.1), 2.0); },
                                  sc::ErrorCode::MomentUndefined));
}

TEST(CompensatorMK, AgreesWithQuadrature) {
  sc::Stream rng(1, sc::Role::Aux, 0, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = sc::make_stable_spec(rng.uniform(1.05, 1.95), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
    const double K = rng.uniform(0.1, 10.0);
    // int_K^inf z a z^-(1+alpha) dz with z = K / v^(1/(alpha-1)) is smooth in v.
    const double a = spec.alpha;
    const int n = 20000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      // Gauss-Legendre style midpoint on v in (0, 1).
      const double v = (i + 0.5) / n;
      const double z = K * std::pow(v, -1.0 / (a - 1.0));
      const double dz = K / (a - 1.0) * std::pow(v, -1.0 / (a - 1.0) - 1.0);
      acc += z * std::pow(z, -1.0 - a) * dz;
    }
    const double quad = (spec.a_plus - spec.a_minus) * acc / n;
    EXPECT_NEAR(sc::compensator_MK(spec, K), quad, 1e-9) << trial;
  }
}

TEST(SampleDrivingPath, NoBigJumpsWhenRateVanishes) {
  sc::Stream rng(2, sc::Role::Driver, 0, 0);
  const auto path = sc::sample_driving_path(sc::make_stable_spec(1.5, 0.3, 0.3), 1.0, 0.1, sc::kInfinity, 0.5, rng);
  EXPECT_TRUE(path.big_jumps.empty());
  EXPECT_TRUE(std::isinf(path.t_K));
  EXPECT_EQ(path.cells(), 10u);
}

TEST(SampleDrivingPath, RejectsBadCutoff) {
  sc::Stream rng(2, sc::Role::Driver, 0, 0);
  EXPECT_TRUE(sctest::throws_code(
      [&] { (void)sc::sample_driving_path(sc::make_stable_spec(1.5, 0.3, 0.3), 1.0, 0.1, 1.0, 1.0, rng); },
      sc::ErrorCode::ConfigError));
}

TEST(SampleDrivingPath, BigJumpInvariants) {
  const auto spec = sc::make_stable_spec(0.8, 0.4, 0.1);
  sc::Stream rng(3, sc::Role::Driver, 0, 0);
  const auto path = sc::sample_driving_path(spec, 50.0, 1.0, 1.0, 0.5, rng);
  ASSERT_FALSE(path.big_jumps.empty());
  double first = sc::kInfinity;
  double total = 0.0;
  for (const auto& j : path.big_jumps) {
    EXPECT_GT(std::fabs(j.size), path.K);
    first = std::min(first, j.time);
    total += j.size;
  }
  EXPECT_EQ(path.t_K, first);
  double inc = 0.0;
  for (double x : path.increments) inc += x;
  EXPECT_NEAR(path.value_at(50.0), inc + total, 1e-9 * (1.0 + std::fabs(inc + total)));
}

TEST(SampleDrivingPath, FirstBigJumpIsExponential) {
  const auto spec = sc::make_stable_spec(1.5, 0.3, 0.3);
  const double K = 0.6;
  const double rate = sc::big_jump_rate(spec, K);
  const double T = 40.0 / rate;
  std::vector<double> tk;
  for (std::uint32_t r = 0; r < 10000; ++r) {
    sc::Stream rng(4, sc::Role::Driver, r, 0);
    tk.push_back(sc::sample_driving_path(spec, T, T, K, 0.5 * K, rng).t_K);
    ASSERT_TRUE(std::isfinite(tk.back()));
  }
  const double d = sc::ks_one_sample(sc::EmpiricalSample(tk), [rate](double t) { return 1.0 - std::exp(-rate * t); });
  EXPECT_LT(d, 0.02);
}

TEST(SampleDrivingPath, CensoredFractionMatchesRate) {
  const auto spec = sc::make_stable_spec(0.8, 0.3, 0.3);
  const double K = 5.0, T = 1.0;
  const double p = 1.0 - std::exp(-sc::big_jump_rate(spec, K) * T);
  const int n = 20000;
  int hit = 0;
  for (std::uint32_t r = 0; r < static_cast<std::uint32_t>(n); ++r) {
    sc::Stream rng(5, sc::Role::Driver, r, 0);
    hit += sc::sample_driving_path(spec, T, 0.25, K, 0.5 * K, rng).t_K <= T;
  }
  EXPECT_NEAR(static_cast<double>(hit) / n, p, 3.0 * std::sqrt(p * (1.0 - p) / n));
}

class PathLaw : public ::testing::TestWithParam<double> {
 protected:
  // Below one the small-jump replacement is cruder, so the cutoff is tighter.
  static double eps(double alpha) { return alpha < 1.0 ? 1e-3 : 0.02; }
};

TEST_P(PathLaw, TerminalValueIsStable) {
  const double alpha = GetParam();
  const auto spec = sc::make_stable_spec(alpha, 0.3, 0.3);
  const double T = 2.0;
  const std::size_t n = 100000;
  std::vector<double> path_values(n), reference(n);
  sc::Stream ref(6, sc::Role::Reference, 0, 0);
  for (std::size_t r = 0; r < n; ++r) {
    sc::Stream rng(6, sc::Role::Driver, static_cast<std::uint32_t>(r), 0);
    const auto path = sc::sample_driving_path(spec, T, 1.0, 20.0, eps(alpha), rng);
    path_values[r] = path.value_at(T);
    reference[r] = std::pow(T, 1.0 / alpha) * sc::sample_stable(spec, ref);
  }
  EXPECT_LT(sc::ks_two_sample(path_values, reference), 0.01);
}

TEST_P(PathLaw, ScalingAndStationarity) {
  const double alpha = GetParam();
  const auto spec = sc::make_stable_spec(alpha, 0.4, 0.2);
  const std::size_t n = 100000;
  std::vector<double> half(n), full(n), first(n), last(n);
  for (std::size_t r = 0; r < n; ++r) {
    sc::Stream rng(7, sc::Role::Driver, static_cast<std::uint32_t>(r), 0);
    const auto path = sc::sample_driving_path(spec, 2.0, 0.5, 20.0, eps(alpha), rng);
    half[r] = path.value_at(1.0);
    full[r] = path.value_at(2.0) / std::pow(2.0, 1.0 / alpha);
    first[r] = path.value_at(0.5);
    last[r] = path.value_at(2.0) - path.value_at(1.5);
  }
  EXPECT_LT(sc::ks_two_sample(half, full), 0.01);
  const double d = sc::ks_two_sample(first, last);
  EXPECT_GT(sc::ks_pvalue(d, static_cast<double>(n) / 2.0), 0.01);
}

INSTANTIATE_TEST_SUITE_P(Indices, PathLaw, ::testing::Values(0.8, 1.5));

TEST(PathFromWindowSums, Examples) {
  const auto spec = sc::make_stable_spec(0.5, 1.0, 1.0);
  const std::vector<double> zeros(8, 0.0);
  const auto flat = sc::path_from_window_sums(zeros, 0.25, spec);
  EXPECT_EQ(flat.mode, sc::PathMode::CoupledFromLedger);
  EXPECT_EQ(flat.value_at(2.0), 0.0);
  EXPECT_TRUE(flat.big_jumps.empty());
  const std::vector<double> one{1.0};
  const auto p = sc::path_from_window_sums(one, 0.25, spec);
  EXPECT_DOUBLE_EQ(p.increments[0], 0.0625);
}

TEST(PathFromWindowSums, ThresholdSetsCensoringWindow) {
  const auto spec = sc::make_stable_spec(0.8, 0.3, 0.3);
  const std::vector<double> w{0.5, -2.0, 7.0, 0.1, -9.0};
  const auto p = sc::path_from_window_sums(w, 0.1, spec, 0.0, 5.0);
  EXPECT_NEAR(p.t_K, 0.3, 1e-12);
  EXPECT_FALSE(p.is_big_window(1));
  EXPECT_TRUE(p.is_big_window(2));
  EXPECT_TRUE(p.is_big_window(4));
}

TEST(PathFromWindowSums, StableInputsGiveStableIncrements) {
  const auto spec = sc::make_stable_spec(1.5, 0.3, 0.2);
  const double delta = 0.2;
  const std::size_t n = 100000;
  sc::Stream rng(8, sc::Role::Driver, 0, 0), ref(8, sc::Role::Reference, 0, 0);
  std::vector<double> w(n), reference(n);
  for (auto& x : w) x = sc::sample_stable(spec, rng);
  for (auto& x : reference) x = std::pow(delta, 1.0 / 1.5) * sc::sample_stable(spec, ref);
  const auto p = sc::path_from_window_sums(w, delta, spec);
  const double d = sc::ks_two_sample(p.increments, reference);
  EXPECT_GT(sc::ks_pvalue(d, static_cast<double>(n) / 2.0), 0.01);
}
