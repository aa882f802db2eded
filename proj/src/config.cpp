// Copyright 2026 The RIM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "rim/errors.hpp"
#include "rim/experiment.hpp"

namespace rim::exp {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::uint64_t ParseUnsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const std::string v = Trim(value);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return out;
}

double ParseReal(const std::string& key, const std::string& value) {
  const std::string v = Trim(value);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  }
}

std::vector<std::size_t> ParseSizes(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ParseUnsigned(key, item));
  if (out.empty()) throw ConfigError("'" + key + "' expects a comma-separated list");
  return out;
}

std::string JoinSizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Key UnsignedKey(std::string name, T ExperimentConfig::*field) {
  return {name,
          [name, field](ExperimentConfig& c, const std::string& v) {
            c.*field = static_cast<T>(ParseUnsigned(name, v));
          },
          [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

Key RealKey(std::string name, double ExperimentConfig::*field) {
  return {name,
          [name, field](ExperimentConfig& c, const std::string& v) { c.*field = ParseReal(name, v); },
          [field](const ExperimentConfig& c) { return FormatNumber(c.*field); }};
}

const std::vector<Key>& Keys() {
  static const std::vector<Key> keys = {
      {"variant", [](ExperimentConfig& c, const std::string& v) { c.variant = ParseVariant(Trim(v)); },
       [](const ExperimentConfig& c) { return VariantName(c.variant); }},
      {"env", [](ExperimentConfig& c, const std::string& v) { c.env = Trim(v); },
       [](const ExperimentConfig& c) { return c.env; }},
      UnsignedKey("total_frames", &ExperimentConfig::total_frames),
      UnsignedKey("seed", &ExperimentConfig::seed),
      UnsignedKey("pop_size", &ExperimentConfig::pop_size),
      UnsignedKey("elite_count", &ExperimentConfig::elite_count),
      UnsignedKey("tournament_size", &ExperimentConfig::tournament_size),
      UnsignedKey("fitness_episodes", &ExperimentConfig::fitness_episodes),
      RealKey("mutation_prob", &ExperimentConfig::mutation_prob),
      RealKey("mutation_scale", &ExperimentConfig::mutation_scale),
      RealKey("crossover_prob", &ExperimentConfig::crossover_prob),
      UnsignedKey("imitation_period", &ExperimentConfig::imitation_period),
      UnsignedKey("injection_period", &ExperimentConfig::injection_period),
      UnsignedKey("rl_episodes_per_generation", &ExperimentConfig::rl_episodes_per_generation),
      {"recruitment",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = Trim(v);
         if (t == "soft") {
           c.recruitment = rl::RecruitmentMode::kSoft;
         } else if (t == "hard") {
           c.recruitment = rl::RecruitmentMode::kHard;
         } else {
           throw ConfigError("'recruitment' must be soft or hard, got '" + v + "'");
         }
       },
       [](const ExperimentConfig& c) {
         return std::string(c.recruitment == rl::RecruitmentMode::kSoft ? "soft" : "hard");
       }},
      {"hidden", [](ExperimentConfig& c, const std::string& v) { c.hidden = ParseSizes("hidden", v); },
       [](const ExperimentConfig& c) { return JoinSizes(c.hidden); }},
      RealKey("gamma", &ExperimentConfig::gamma),
      RealKey("tau0", &ExperimentConfig::tau0),
      RealKey("tau1", &ExperimentConfig::tau1),
      RealKey("actor_lr", &ExperimentConfig::actor_lr),
      RealKey("critic_lr", &ExperimentConfig::critic_lr),
      RealKey("noise_sigma", &ExperimentConfig::noise_sigma),
      UnsignedKey("batch_size", &ExperimentConfig::batch_size),
      UnsignedKey("warmup", &ExperimentConfig::warmup),
      UnsignedKey("buffer_capacity", &ExperimentConfig::buffer_capacity),
      UnsignedKey("imitation_iterations", &ExperimentConfig::imitation_iterations),
      UnsignedKey("imitation_batch_size", &ExperimentConfig::imitation_batch_size),
      RealKey("imitation_lr", &ExperimentConfig::imitation_lr),
      UnsignedKey("imitation_holdout", &ExperimentConfig::imitation_holdout),
      UnsignedKey("eval_interval_frames", &ExperimentConfig::eval_interval_frames),
      UnsignedKey("eval_episodes", &ExperimentConfig::eval_episodes),
      UnsignedKey("snapshot_period", &ExperimentConfig::snapshot_period),
      {"snapshot_dir", [](ExperimentConfig& c, const std::string& v) { c.snapshot_dir = Trim(v); },
       [](const ExperimentConfig& c) { return c.snapshot_dir; }},
  };
  return keys;
}

}  // namespace

std::string VariantName(Variant v) {
  switch (v) {
    case Variant::kRim: return "RIM";
    case Variant::kRimIL: return "RIM-IL";
    case Variant::kRimEA: return "RIM-EA";
    case Variant::kRimPG: return "RIM-PG";
    case Variant::kErl: return "ERL";
    case Variant::kDdpg: return "DDPG";
    case Variant::kEa: return "EA";
  }
  return "?";
}

std::vector<Variant> AllVariants() {
  return {Variant::kRim, Variant::kRimIL, Variant::kRimEA, Variant::kRimPG,
          Variant::kErl, Variant::kDdpg,  Variant::kEa};
}

Variant ParseVariant(const std::string& name) {
  for (Variant v : AllVariants()) {
    if (VariantName(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "' (expected RIM, RIM-IL, RIM-EA, RIM-PG, ERL, DDPG or EA)");
}

void ExperimentConfig::Validate() const {
  const auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  bool known_env = false;
  for (const auto& name : envs::EnvNames()) known_env = known_env || name == env;
  check(known_env, "unknown environment '" + env + "'");
  check(total_frames >= 1, "total_frames must be positive");
  check(eval_interval_frames >= 1, "eval_interval_frames must be positive");
  check(total_frames >= eval_interval_frames, "total_frames must be >= eval_interval_frames");
  check(pop_size >= 1, "pop_size must be positive");
  check(elite_count >= 1 && elite_count <= pop_size, "elite_count must lie in [1, pop_size]");
  check(tournament_size >= 1, "tournament_size must be positive");
  check(fitness_episodes >= 1, "fitness_episodes must be positive");
  check(mutation_prob >= 0.0 && mutation_prob <= 1.0, "mutation_prob must lie in [0, 1]");
  check(mutation_scale >= 0.0, "mutation_scale must be non-negative");
  check(crossover_prob >= 0.0 && crossover_prob <= 1.0, "crossover_prob must lie in [0, 1]");
  check(imitation_period >= 1 && injection_period >= 1, "periods must be >= 1");
  check(rl_episodes_per_generation >= 1, "rl_episodes_per_generation must be positive");
  check(!hidden.empty(), "hidden must list at least one layer width");
  for (std::size_t h : hidden) check(h >= 1, "hidden widths must be positive");
  check(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  check(tau0 > 0.0 && tau0 <= 1.0 && tau1 > 0.0 && tau1 <= 1.0, "tau0/tau1 must lie in (0, 1]");
  check(actor_lr > 0.0 && critic_lr > 0.0 && imitation_lr > 0.0, "learning rates must be positive");
  check(noise_sigma >= 0.0, "noise_sigma must be non-negative");
  check(batch_size >= 1 && imitation_batch_size >= 1, "batch sizes must be positive");
  check(buffer_capacity >= 1, "buffer_capacity must be positive");
  check(imitation_iterations >= 1, "imitation_iterations must be positive");
  check(imitation_holdout >= 1, "imitation_holdout must be positive");
  check(eval_episodes >= 1, "eval_episodes must be positive");
}

void ApplySetting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : Keys()) {
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig ParseConfigText(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    ApplySetting(base, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig LoadConfigFile(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfigText(ss.str(), std::move(base));
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> names;
  for (const auto& k : Keys()) names.push_back(k.name);
  return names;
}

std::map<std::string, std::string> ConfigToMap(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& k : Keys()) out[k.name] = k.get(cfg);
  return out;
}

}  // namespace rim::exp
