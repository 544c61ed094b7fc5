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

#ifndef STABLECHAOS_HARNESS_CONFIG_HPP
#define STABLECHAOS_HARNESS_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stablechaos/distributions.hpp"
#include "stablechaos/error.hpp"
#include "stablechaos/models.hpp"
#include "stablechaos/stable_process.hpp"

namespace stablechaos::harness {

enum class Experiment { SelfSim, CltRate, CouplingSweep, ChaosTest };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::SelfSim: return "selfsim";
    case Experiment::CltRate: return "clt-rate";
    case Experiment::CouplingSweep: return "coupling-sweep";
    case Experiment::ChaosTest: return "chaos-test";
  }
  return "unknown";
}

inline Experiment experiment_from_string(const std::string& s) {
  for (auto e : {Experiment::SelfSim, Experiment::CltRate, Experiment::CouplingSweep, Experiment::ChaosTest}) {
    if (to_string(e) == s) return e;
  }
  throw Error(ErrorCode::ConfigError, "unknown experiment '" + s + "'");
}

/// Flat "section.key" -> value map. Every recognised key has a default, so a
/// resolved map always lists the full schema.
using ConfigMap = std::map<std::string, std::string>;

inline const ConfigMap& config_defaults() {
  static const ConfigMap defaults = {
      {"experiment.name", "coupling-sweep"},
      {"model.drift", "tanh"},
      {"model.drift_beta0", "1"},
      {"model.drift_beta1", "0.5"},
      {"model.rate", "logistic"},
      {"model.rate_c", "1"},
      {"model.rate_lo", "0.5"},
      {"model.rate_hi", "1"},
      {"model.kick", "tanh"},
      {"model.kick_c", "0.5"},
      {"model.initial", "gaussian"},
      {"model.initial_mean", "0"},
      {"model.initial_sd", "1"},
      {"model.initial_lo", "-1"},
      {"model.initial_hi", "1"},
      {"model.initial_point", "0"},
      {"law.mode", "heavy"},
      {"law.alpha", "0.8"},
      {"law.gamma", "0.5"},
      {"law.beta", "0.2"},
      {"law.A", "0.2"},
      {"law.A_tilde", "0.2"},
      {"law.L", "1"},
      {"law.middle", "atom"},
      {"run.N", "64,256,1024,4096"},
      {"run.T", "1"},
      {"run.K", "auto"},
      {"run.censor_probability", "0.01"},
      {"run.alpha_minus", "0.7"},
      {"run.alpha_plus", "0.9"},
      {"run.eta", "auto"},
      {"run.replications", "200"},
      {"run.seed", "20260101"},
      {"run.threads", "0"},
      {"run.out", "out"},
      {"selfsim.windows", "100000"},
      {"selfsim.poisson_mean", "50"},
      {"clt.n", "100,1000,10000"},
      {"clt.reference", "1000000"},
  };
  return defaults;
}

/// Keys that do not change results and are left out of the config hash.
inline bool is_volatile_key(const std::string& key) { return key == "run.threads" || key == "run.out"; }

/// Reads an INI stream. Unknown sections or keys are rejected.
inline ConfigMap parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed config: ") + e.what());
  }
  ConfigMap out;
  const auto& defaults = config_defaults();
  for (const auto& [section, keys] : tree) {
    require(!keys.empty() || keys.data().empty(), ErrorCode::ConfigError, "key outside a section: " + section);
    for (const auto& [key, value] : keys) {
      const std::string full = section + "." + key;
      require(defaults.count(full) == 1, ErrorCode::ConfigError, "unknown config key '" + full + "'");
      out[full] = value.data();
    }
  }
  return out;
}

inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ConfigError, "cannot open config file " + path);
  return parse_config(in);
}

/// STABLECHAOS_<SECTION>_<KEY>, upper-cased, e.g. STABLECHAOS_RUN_REPLICATIONS.
inline std::string env_name(const std::string& key) {
  std::string out = "STABLECHAOS_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

inline void apply_env_overrides(ConfigMap& map, const EnvLookup& lookup = process_env) {
  for (const auto& [key, value] : config_defaults()) {
    (void)value;
    if (auto v = lookup(env_name(key))) map[key] = *v;
  }
}

/// Fills every missing key with its default.
inline ConfigMap resolve(const ConfigMap& map) {
  ConfigMap out = config_defaults();
  for (const auto& [k, v] : map) out[k] = v;
  return out;
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string canonical_text(const ConfigMap& resolved) {
  std::string out;
  for (const auto& [k, v] : resolved) {
    if (!is_volatile_key(k)) out += k + "=" + v + "\n";
  }
  return out;
}

inline std::uint64_t config_hash(const ConfigMap& resolved) { return fnv1a(canonical_text(resolved)); }

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct ExperimentConfig {
  Experiment experiment = Experiment::CouplingSweep;
  ModelSpec model;
  HeavyTailSpec heavy;
  bool exact = false;
  std::vector<std::size_t> N;
  double T = 1.0;
  std::optional<double> K;
  double censor_probability = 0.01;
  double alpha_minus = 0.7;
  double alpha_plus = 0.9;
  std::optional<double> eta;
  std::size_t replications = 1;
  std::uint64_t master_seed = 0;
  std::size_t threads = 0;
  std::string output = "out";
  std::size_t windows = 100000;
  double poisson_mean = 50.0;
  std::vector<std::size_t> clt_n;
  std::size_t reference_size = 1000000;
  ConfigMap resolved;
  std::uint64_t hash = 0;

  double alpha() const { return heavy.alpha; }
  double gamma() const { return heavy.gamma; }
  StableSpec stable() const { return stable_params_from_heavy(heavy); }
  CollateralLaw law() const {
    if (exact) return CollateralLaw{stable()};
    return CollateralLaw{heavy};
  }
};

namespace detail {

inline double to_double(const ConfigMap& m, const std::string& key) {
  const std::string& s = m.at(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ConfigError, "'" + key + "' is not a number: '" + s + "'");
}

inline std::uint64_t to_u64(const ConfigMap& m, const std::string& key) {
  const std::string& s = m.at(key);
  try {
    std::size_t used = 0;
    if (!s.empty() && s[0] != '-') {
      const auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ConfigError, "'" + key + "' is not a nonnegative integer: '" + s + "'");
}

inline std::vector<std::size_t> to_list(const ConfigMap& m, const std::string& key) {
  std::vector<std::size_t> out;
  std::stringstream ss(m.at(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    ConfigMap one{{key, item}};
    out.push_back(to_u64(one, key));
  }
  require(!out.empty(), ErrorCode::ConfigError, "'" + key + "' must list at least one value");
  return out;
}

inline std::optional<double> auto_or_double(const ConfigMap& m, const std::string& key) {
  if (m.at(key) == "auto") return std::nullopt;
  return to_double(m, key);
}

inline ModelSpec model_from(const ConfigMap& m) {
  ModelSpec spec;
  const auto& drift = m.at("model.drift");
  if (drift == "zero") {
    spec.b = ZeroDrift{};
  } else if (drift == "tanh") {
    spec.b = TanhDrift{to_double(m, "model.drift_beta0"), to_double(m, "model.drift_beta1")};
  } else {
    throw Error(ErrorCode::ConfigError, "unknown drift '" + drift + "'");
  }
  const auto& rate = m.at("model.rate");
  if (rate == "constant") {
    spec.f = ConstantRate{to_double(m, "model.rate_c")};
  } else if (rate == "logistic") {
    spec.f = LogisticRate{to_double(m, "model.rate_lo"), to_double(m, "model.rate_hi")};
  } else {
    throw Error(ErrorCode::ConfigError, "unknown rate '" + rate + "'");
  }
  const auto& kick = m.at("model.kick");
  if (kick == "zero") {
    spec.psi = ZeroKick{};
  } else if (kick == "constant") {
    spec.psi = ConstantKick{to_double(m, "model.kick_c")};
  } else if (kick == "tanh") {
    spec.psi = TanhKick{to_double(m, "model.kick_c")};
  } else {
    throw Error(ErrorCode::ConfigError, "unknown kick '" + kick + "'");
  }
  const auto& init = m.at("model.initial");
  if (init == "point") {
    spec.nu0 = PointMass{to_double(m, "model.initial_point")};
  } else if (init == "gaussian") {
    spec.nu0 = GaussianLaw{to_double(m, "model.initial_mean"), to_double(m, "model.initial_sd")};
  } else if (init == "uniform") {
    spec.nu0 = UniformLaw{to_double(m, "model.initial_lo"), to_double(m, "model.initial_hi")};
  } else {
    throw Error(ErrorCode::ConfigError, "unknown initial law '" + init + "'");
  }
  return spec;
}

inline HeavyTailSpec heavy_from(const ConfigMap& m) {
  HeavyTailSpec h;
  h.alpha = to_double(m, "law.alpha");
  h.gamma = to_double(m, "law.gamma");
  h.beta = to_double(m, "law.beta");
  h.A = to_double(m, "law.A");
  h.A_tilde = to_double(m, "law.A_tilde");
  h.L = to_double(m, "law.L");
  const auto& middle = m.at("law.middle");
  if (middle == "atom") {
    h.middle_fill = MiddleFill::AtomAtZero;
  } else if (middle == "uniform") {
    h.middle_fill = MiddleFill::UniformOnMiddle;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown middle fill '" + middle + "'");
  }
  return h;
}

}  // namespace detail

/// Builds a typed config from a (partial) map. Only parsing happens here;
/// cross-field checks live in validate_config.
inline ExperimentConfig build_config(const ConfigMap& map, Experiment experiment) {
  ExperimentConfig cfg;
  cfg.resolved = resolve(map);
  cfg.resolved["experiment.name"] = to_string(experiment);
  const auto& m = cfg.resolved;
  cfg.experiment = experiment;
  cfg.model = detail::model_from(m);
  cfg.heavy = detail::heavy_from(m);
  const auto& mode = m.at("law.mode");
  require(mode == "heavy" || mode == "exact", ErrorCode::ConfigError, "law.mode must be heavy or exact");
  cfg.exact = mode == "exact";
  cfg.N = detail::to_list(m, "run.N");
  cfg.T = detail::to_double(m, "run.T");
  cfg.K = detail::auto_or_double(m, "run.K");
  cfg.censor_probability = detail::to_double(m, "run.censor_probability");
  cfg.alpha_minus = detail::to_double(m, "run.alpha_minus");
  cfg.alpha_plus = detail::to_double(m, "run.alpha_plus");
  cfg.eta = detail::auto_or_double(m, "run.eta");
  cfg.replications = detail::to_u64(m, "run.replications");
  cfg.master_seed = detail::to_u64(m, "run.seed");
  cfg.threads = detail::to_u64(m, "run.threads");
  cfg.output = m.at("run.out");
  cfg.windows = detail::to_u64(m, "selfsim.windows");
  cfg.poisson_mean = detail::to_double(m, "selfsim.poisson_mean");
  cfg.clt_n = detail::to_list(m, "clt.n");
  cfg.reference_size = detail::to_u64(m, "clt.reference");
  cfg.hash = config_hash(cfg.resolved);
  return cfg;
}

}  // namespace stablechaos::harness

#endif  // STABLECHAOS_HARNESS_CONFIG_HPP
