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

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "stablechaos/harness/config.hpp"
#include "stablechaos/harness/delta.hpp"
#include "stablechaos/harness/experiments.hpp"
#include "test_util.hpp"

namespace sc = stablechaos;
namespace h = stablechaos::harness;
namespace fs = std::filesystem;

namespace {

h::ConfigMap parse(const std::string& text) {
  std::istringstream in(text);
  return h::parse_config(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("stablechaos_" + name);
  fs::remove_all(dir);
  return dir;
}

// Small but complete configurations for every experiment.
h::ExperimentConfig tiny(h::Experiment e, const fs::path& out) {
  h::ConfigMap m;
  m["run.N"] = "64,128,256";
  m["run.replications"] = "2";
  m["run.seed"] = "77";
  m["run.threads"] = "2";
  m["run.out"] = out.string();
  m["selfsim.windows"] = "500";
  m["clt.n"] = "10,20,40";
  m["clt.reference"] = "500";
  if (e == h::Experiment::SelfSim) m["law.mode"] = "exact";
  auto cfg = h::build_config(m, e);
  h::validate_config(cfg);
  return cfg;
}

}  // namespace

TEST(ChooseDelta, Examples) {
  const auto a = h::choose_delta(0.8, 0.5, 1024);
  EXPECT_NEAR(a.C, 0.25, 1e-15);
  EXPECT_NEAR(a.eta, 0.2, 1e-15);
  EXPECT_NEAR(a.predicted_rate_exponent, -0.2, 1e-15);
  EXPECT_NEAR(a.delta, 0.25, 1e-12);

  const auto b = h::choose_delta(0.5, 0.2, 100);
  EXPECT_NEAR(b.C, 0.25, 1e-15);
  EXPECT_NEAR(b.eta, 0.2, 1e-15);
  EXPECT_NEAR(b.predicted_rate_exponent, -0.5 / 2.5, 1e-15);

  const auto c = h::choose_delta(1.5, 0.3, 100);
  EXPECT_NEAR(c.C, 0.2, 1e-15);
  EXPECT_NEAR(c.predicted_rate_exponent, -0.060606, 1e-6);
  EXPECT_NEAR(c.eta, 0.2 * 2.25 / 2.2, 1e-15);
}

TEST(ChooseDelta, RemainingCases) {
  // gamma in (alpha/2, 2 - alpha): C = 1/2.
  EXPECT_NEAR(h::choose_delta(1.2, 0.7, 10).C, 0.5, 1e-15);
  // gamma > 2 - alpha with alpha < 4/3: C = 1/2.
  EXPECT_NEAR(h::choose_delta(1.2, 0.9, 10).C, 0.5, 1e-15);
  // gamma > 2 - alpha with alpha > 4/3: C = (2 - alpha) / alpha.
  EXPECT_NEAR(h::choose_delta(1.6, 0.6, 10).C, 0.25, 1e-15);
}

TEST(ChooseDelta, EtaBelowOneEverywhere) {
  for (double alpha = 0.05; alpha < 2.0; alpha += 0.05) {
    if (std::fabs(alpha - 1.0) < 1e-9) continue;
    for (double gamma = 0.03; gamma < 3.0; gamma += 0.07) {
      try {
        const auto d = h::choose_delta(alpha, gamma, 1000);
        EXPECT_GT(d.eta, 0.0);
        EXPECT_LT(d.eta, 1.0);
        EXPECT_GT(1000.0 * d.delta, 1.0);
      } catch (const sc::Error& e) {
        EXPECT_EQ(e.code(), sc::ErrorCode::UncoveredCase) << alpha << ' ' << gamma;
      }
    }
  }
}

TEST(ChooseDelta, BoundariesAreUncovered) {
  EXPECT_TRUE(sctest::throws_code([] { (void)h::choose_delta(1.5, 0.5, 10); }, sc::ErrorCode::UncoveredCase));
  EXPECT_TRUE(sctest::throws_code([] { (void)h::choose_delta(1.2, 0.6, 10); }, sc::ErrorCode::UncoveredCase));
  EXPECT_TRUE(sctest::throws_code([] { (void)h::choose_delta(0.7, 0.3, 10); }, sc::ErrorCode::UncoveredCase));
}

TEST(Config, ParsesSectionsAndRejectsUnknownKeys) {
  const auto m = parse("[run]\nN = 10,20\nseed = 5\n[law]\nalpha = 0.6\n");
  EXPECT_EQ(m.at("run.N"), "10,20");
  EXPECT_EQ(m.at("law.alpha"), "0.6");
  EXPECT_TRUE(sctest::throws_code([] { (void)parse("[run]\nbogus = 1\n"); }, sc::ErrorCode::ConfigError));
  EXPECT_TRUE(sctest::throws_code([] { (void)parse("[nosuch]\nN = 1\n"); }, sc::ErrorCode::ConfigError));
  EXPECT_TRUE(sctest::throws_code([] { (void)parse("[run\nN = 1\n"); }, sc::ErrorCode::ConfigError));
  EXPECT_TRUE(sctest::throws_code([] { (void)h::load_config_file("/nonexistent/x.ini"); }, sc::ErrorCode::ConfigError));
}

TEST(Config, BadValuesAreConfigErrors) {
  h::ConfigMap m;
  m["run.replications"] = "many";
  EXPECT_TRUE(sctest::throws_code([&] { (void)h::build_config(m, h::Experiment::CouplingSweep); },
                                  sc::ErrorCode::ConfigError));
  m.clear();
  m["law.mode"] = "other";
  EXPECT_TRUE(sctest::throws_code([&] { (void)h::build_config(m, h::Experiment::CouplingSweep); },
                                  sc::ErrorCode::ConfigError));
  EXPECT_TRUE(sctest::throws_code([] { (void)h::experiment_from_string("plot"); }, sc::ErrorCode::ConfigError));
}

TEST(Config, EnvironmentOverrides) {
  EXPECT_EQ(h::env_name("run.replications"), "STABLECHAOS_RUN_REPLICATIONS");
  EXPECT_EQ(h::env_name("law.A_tilde"), "STABLECHAOS_LAW_A_TILDE");
  const std::map<std::string, std::string> env = {{"STABLECHAOS_RUN_SEED", "99"}, {"STABLECHAOS_LAW_ALPHA", "0.6"}};
  h::ConfigMap m = parse("[run]\nseed = 5\n");
  h::apply_env_overrides(m, [&](const std::string& name) -> std::optional<std::string> {
    const auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  EXPECT_EQ(m.at("run.seed"), "99");
  EXPECT_EQ(m.at("law.alpha"), "0.6");
}

TEST(Config, HashIgnoresThreadsAndOutput) {
  h::ConfigMap a, b;
  a["run.threads"] = "1";
  a["run.out"] = "x";
  b["run.threads"] = "8";
  b["run.out"] = "y";
  EXPECT_EQ(h::build_config(a, h::Experiment::ChaosTest).hash, h::build_config(b, h::Experiment::ChaosTest).hash);
  b["run.seed"] = "1";
  EXPECT_NE(h::build_config(a, h::Experiment::ChaosTest).hash, h::build_config(b, h::Experiment::ChaosTest).hash);
  EXPECT_NE(h::build_config(a, h::Experiment::ChaosTest).hash,
            h::build_config(a, h::Experiment::CouplingSweep).hash);
}

TEST(Validate, ZeroReplicationsIsRejected) {
  h::ConfigMap m;
  m["run.replications"] = "0";
  auto cfg = h::build_config(m, h::Experiment::CouplingSweep);
  EXPECT_TRUE(sctest::throws_code([&] { (void)h::validate_config(cfg); }, sc::ErrorCode::ConfigError));
}

TEST(Validate, AuxiliaryIndices) {
  h::ConfigMap m;
  m["run.alpha_minus"] = "0.9";
  auto cfg = h::build_config(m, h::Experiment::CouplingSweep);
  EXPECT_TRUE(sctest::throws_code([&] { (void)h::validate_config(cfg); }, sc::ErrorCode::ConfigError));
  m.clear();
  m["law.alpha"] = "1.5";
  m["law.gamma"] = "0.3";
  m["run.alpha_minus"] = "0.8";
  m["run.alpha_plus"] = "1.8";
  cfg = h::build_config(m, h::Experiment::CouplingSweep);
  EXPECT_TRUE(sctest::throws_code([&] { (void)h::validate_config(cfg); }, sc::ErrorCode::ConfigError));
  m["run.alpha_minus"] = "1.2";
  cfg = h::build_config(m, h::Experiment::CouplingSweep);
  EXPECT_NO_THROW((void)h::validate_config(cfg));
  EXPECT_FALSE(cfg.model.has_kick());
}

TEST(Validate, WindowConditionPerN) {
  h::ConfigMap m;
  m["run.N"] = "4,64";
  m["model.rate_hi"] = "1.5";
  auto cfg = h::build_config(m, h::Experiment::CouplingSweep);
  EXPECT_TRUE(sctest::throws_code([&] { (void)h::validate_config(cfg); }, sc::ErrorCode::ConfigError));
}

TEST(Validate, ShippedConfigsAreValid) {
  const fs::path dir = fs::path(STABLECHAOS_SOURCE_DIR) / "configs";
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".ini") continue;
    const auto map = h::load_config_file(entry.path().string());
    const auto e = h::experiment_from_string(h::resolve(map).at("experiment.name"));
    auto cfg = h::build_config(map, e);
    EXPECT_NO_THROW((void)h::validate_config(cfg)) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 6);
}

TEST(Plan, DefaultTruncationLevel) {
  h::ConfigMap m;
  auto cfg = h::build_config(m, h::Experiment::CouplingSweep);
  h::validate_config(cfg);
  const auto plan = h::plan_grid(cfg);
  ASSERT_EQ(plan.size(), 4u);
  for (const auto& p : plan) {
    EXPECT_NEAR(1.0 - std::exp(-sc::big_jump_rate(cfg.stable(), p.K) * cfg.T), 0.01, 1e-12);
    EXPECT_NEAR(p.delta.delta, std::pow(static_cast<double>(p.N), -0.2), 1e-12);
  }
}

TEST(Output, GoldenHeadersAndManifest) {
  const std::map<h::Experiment, std::map<std::string, std::string>> golden = {
      {h::Experiment::SelfSim,
       {{"selfsim.csv",
         "alpha,windows,poisson_mean,nonempty,ks_stat,ks_pvalue,chi2_stat,chi2_dof,chi2_pvalue,rank_corr,seed"}}},
      {h::Experiment::CltRate,
       {{"clt_rate.csv", "n,replications,metric,distance,distance_se,sample_distance,alpha,gamma,seed"},
        {"clt_rate_summary.csv", "metric,slope,slope_se,predicted,alpha,gamma"}}},
      {h::Experiment::CouplingSweep,
       {{"coupling_sweep.csv", "t,err_mean,err_se,err_censored_mean,censor_frac,N,delta,K,alpha,gamma,seed"},
        {"coupling_sweep_summary.csv", "quantity,slope,slope_se,predicted,strictly_decreasing"}}},
      {h::Experiment::ChaosTest,
       {{"chaos_test.csv", "N,delta,K,replications,metric,distance,w1,seed"},
        {"chaos_test_summary.csv", "quantity,slope,slope_se,predicted,strictly_decreasing"}}},
  };
  for (const auto& [e, files] : golden) {
    const auto dir = fresh_dir("golden_" + h::to_string(e));
    const auto cfg = tiny(e, dir);
    const auto artifacts = h::run_and_write(cfg);
    for (const auto& [name, header] : files) {
      EXPECT_EQ(first_line(dir / name), header) << name;
    }
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest.at("experiment"), h::to_string(e));
    EXPECT_EQ(manifest.at("config_hash"), h::hex64(cfg.hash));
    EXPECT_EQ(manifest.at("master_seed"), 77u);
    for (const auto& [name, header] : files) {
      (void)header;
      EXPECT_EQ(manifest.at("files").at(name), h::hex64(h::fnv1a(slurp(dir / name))));
    }
  }
}

TEST(Output, CouplingSweepHasOneRowPerNAndTime) {
  const auto dir = fresh_dir("rows");
  const auto cfg = tiny(h::Experiment::CouplingSweep, dir);
  (void)h::run_and_write(cfg);
  std::ifstream in(dir / "coupling_sweep.csv");
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  std::size_t expected = 0;
  for (const auto& p : h::plan_grid(cfg)) expected += sc::window_grid(cfg.T, p.delta.delta).size();
  EXPECT_EQ(rows, expected);
  std::ifstream s(dir / "coupling_sweep_summary.csv");
  std::getline(s, line);
  std::getline(s, line);
  EXPECT_NE(line.find("-0.2"), std::string::npos) << line;
}

TEST(Output, RerunsAreByteIdentical) {
  for (auto e : {h::Experiment::SelfSim, h::Experiment::CltRate, h::Experiment::CouplingSweep,
                 h::Experiment::ChaosTest}) {
    const auto d1 = fresh_dir("rerun1_" + h::to_string(e));
    const auto d2 = fresh_dir("rerun2_" + h::to_string(e));
    auto c1 = tiny(e, d1);
    auto c2 = tiny(e, d2);
    c2.threads = 1;
    const auto a1 = h::run_and_write(c1);
    (void)h::run_and_write(c2);
    for (const auto& f : a1.files) EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << h::to_string(e) << ' ' << f;
  }
}
