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

// Command-line front end: one subcommand per experiment plus `validate`.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stablechaos/harness/config.hpp"
#include "stablechaos/harness/experiments.hpp"

namespace sc = stablechaos;
namespace h = stablechaos::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "master seed (overrides run.seed)");
  cmd->add_option("--out", flags.out, "output directory (overrides run.out)");
  cmd->add_option("--threads", flags.threads, "worker threads, 0 = all cores (overrides run.threads)");
}

h::ConfigMap gather(const CommonFlags& flags) {
  h::ConfigMap map;
  if (!flags.config.empty()) map = h::load_config_file(flags.config);
  h::apply_env_overrides(map);
  if (flags.seed) map["run.seed"] = std::to_string(*flags.seed);
  if (flags.out) map["run.out"] = *flags.out;
  if (flags.threads) map["run.threads"] = std::to_string(*flags.threads);
  return map;
}

int run(h::Experiment experiment, const CommonFlags& flags) {
  auto cfg = h::build_config(gather(flags), experiment);
  h::validate_config(cfg);
  std::cerr << "[" << h::to_string(experiment) << "] config " << h::hex64(cfg.hash) << " seed " << cfg.master_seed
            << " -> " << cfg.output << '\n';
  const auto artifacts = h::run_and_write(cfg, &std::cerr);
  for (const auto& f : artifacts.files) std::cout << cfg.output << '/' << f << '\n';
  return kExitOk;
}

int validate(const CommonFlags& flags, const std::string& experiment_name) {
  const auto map = gather(flags);
  const auto resolved = h::resolve(map);
  const auto experiment =
      h::experiment_from_string(experiment_name.empty() ? resolved.at("experiment.name") : experiment_name);
  auto cfg = h::build_config(map, experiment);
  const auto audit = h::validate_config(cfg);
  std::cout << "experiment " << h::to_string(experiment) << "\nconfig_hash " << h::hex64(cfg.hash) << '\n';
  for (const auto& c : audit.checks) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << ' ' << h::num(c.value) << '\n';
  }
  if (experiment == h::Experiment::CouplingSweep || experiment == h::Experiment::ChaosTest) {
    for (const auto& p : h::plan_grid(cfg)) {
      std::cout << "N " << p.N << " delta " << h::num(p.delta.delta) << " eta " << h::num(p.delta.eta) << " K "
                << h::num(p.K) << " predicted_exponent " << h::num(p.delta.predicted_rate_exponent) << '\n';
    }
  }
  std::cout << "valid\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stablechaos: mean-field particle systems with alpha-stable collateral jumps"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string validate_experiment;

  struct Entry {
    const char* name;
    const char* help;
    h::Experiment experiment;
  };
  const Entry entries[] = {
      {"selfsim", "random-sum self-similarity check", h::Experiment::SelfSim},
      {"clt-rate", "stable-CLT convergence rate", h::Experiment::CltRate},
      {"coupling-sweep", "coupled finite-vs-limit error over N", h::Experiment::CouplingSweep},
      {"chaos-test", "propagation of chaos over N", h::Experiment::ChaosTest},
  };
  std::vector<std::pair<CLI::App*, h::Experiment>> commands;
  for (const auto& e : entries) {
    auto* cmd = app.add_subcommand(e.name, e.help);
    add_common(cmd, flags);
    commands.emplace_back(cmd, e.experiment);
  }
  auto* val = app.add_subcommand("validate", "check a config and print the coefficient audit");
  add_common(val, flags);
  val->add_option("--experiment", validate_experiment, "experiment to validate for (default: experiment.name)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (val->parsed()) return validate(flags, validate_experiment);
    for (const auto& [cmd, experiment] : commands) {
      if (cmd->parsed()) return run(experiment, flags);
    }
  } catch (const sc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == sc::ErrorCode::RootFindFailure ? kExitRuntime : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
