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

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "stablechaos/metrics.hpp"
#include "stablechaos/rng.hpp"

namespace sc = stablechaos;

TEST(Philox, KnownAnswerVectors) {
  using Block = std::array<std::uint32_t, 4>;
  EXPECT_EQ(sc::detail::philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(sc::detail::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(sc::detail::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Stream, SameKeyGivesSameSequence) {
  sc::Stream a(42, sc::Role::Driver, 3, 7);
  sc::Stream b(42, sc::Role::Driver, 3, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Stream, DistinctKeysGiveDistinctSequences) {
  std::set<std::uint64_t> firsts;
  for (std::uint32_t role = 1; role <= 7; ++role) {
    for (std::uint32_t rep = 0; rep < 4; ++rep) {
      for (std::uint32_t sub = 0; sub < 4; ++sub) {
        sc::Stream s(9, static_cast<sc::Role>(role), rep, sub);
        firsts.insert(s());
      }
    }
  }
  EXPECT_EQ(firsts.size(), 7u * 4u * 4u);
  sc::Stream a(1, sc::Role::Aux, 0, 0), b(2, sc::Role::Aux, 0, 0);
  EXPECT_NE(a(), b());
}

TEST(Stream, AddingReplicatesLeavesExistingOnesUntouched) {
  const sc::ReplicateStreams r0{5, 0};
  auto before = r0.stream(sc::Role::Collateral);
  const auto x = before.uniform();
  for (std::uint32_t rep = 1; rep < 100; ++rep) (void)sc::ReplicateStreams{5, rep}.stream(sc::Role::Collateral)();
  auto after = r0.stream(sc::Role::Collateral);
  EXPECT_EQ(after.uniform(), x);
}

TEST(Stream, UniformIsOpenAndUniform) {
  sc::Stream s(11, sc::Role::Aux, 0, 0);
  std::vector<double> u(100000);
  for (auto& v : u) {
    v = s.uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
  const sc::EmpiricalSample sample(u);
  const double d = sc::ks_one_sample(sample, [](double x) { return x; });
  EXPECT_GT(sc::ks_pvalue(d, static_cast<double>(u.size())), 0.001);
}

TEST(Stream, NormalAndExponentialMoments) {
  sc::Stream s(12, sc::Role::Aux, 0, 0);
  const int n = 200000;
  double m = 0.0, v = 0.0, e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m += z;
    v += z * z;
    e += s.exponential(2.0);
  }
  EXPECT_NEAR(m / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(v / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(e / n, 0.5, 4.0 * 0.5 / std::sqrt(n));
}

TEST(Stream, PoissonMatchesMeanAndVarianceOnBothBranches) {
  sc::Stream s(13, sc::Role::Aux, 0, 0);
  for (double mean : {0.3, 5.0, 50.0, 1000.0}) {
    const int n = 100000;
    std::vector<std::size_t> counts(n);
    double m = 0.0, v = 0.0;
    for (auto& c : counts) {
      c = s.poisson(mean);
      m += static_cast<double>(c);
    }
    m /= n;
    for (auto c : counts) v += (static_cast<double>(c) - m) * (static_cast<double>(c) - m);
    v /= n - 1;
    EXPECT_NEAR(m, mean, 4.0 * std::sqrt(mean / n)) << mean;
    EXPECT_NEAR(v / mean, 1.0, 0.03) << mean;
    EXPECT_GT(sc::poisson_goodness_of_fit(counts, mean).p_value, 0.001) << mean;
  }
  EXPECT_EQ(s.poisson(0.0), 0u);
}

TEST(Stream, WorksWithStandardDistributions) {
  sc::Stream s(14, sc::Role::Aux, 0, 0);
  std::uniform_int_distribution<int> pick(0, 9);
  std::vector<int> hist(10, 0);
  for (int i = 0; i < 10000; ++i) ++hist[pick(s)];
  EXPECT_GT(*std::min_element(hist.begin(), hist.end()), 850);
}
