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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rim/agent.hpp"
#include "rim/envs.hpp"
#include "rim/evolution.hpp"

namespace rim::exp {

enum class Variant { kRim, kRimIL, kRimEA, kRimPG, kErl, kDdpg, kEa };

std::string VariantName(Variant v);
Variant ParseVariant(const std::string& name);  // throws ConfigError
std::vector<Variant> AllVariants();

struct ExperimentConfig {
  Variant variant = Variant::kRim;
  std::string env = "PointMass2D";
  std::uint64_t total_frames = 150'000;
  std::uint64_t seed = 0;

  // Population.
  std::size_t pop_size = 10;
  std::size_t elite_count = 1;
  std::size_t tournament_size = 3;
  std::size_t fitness_episodes = 1;
  double mutation_prob = 0.01;
  double mutation_scale = 0.1;
  double crossover_prob = 0.0;

  // Interplay between the population and the agent.
  std::size_t imitation_period = 10;
  std::size_t injection_period = 10;
  std::size_t rl_episodes_per_generation = 1;
  rl::RecruitmentMode recruitment = rl::RecruitmentMode::kSoft;

  // Agent.
  std::vector<std::size_t> hidden = {64, 64};
  double gamma = 0.99;
  double tau0 = 0.001;
  double tau1 = 0.001;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double noise_sigma = 0.1;
  std::size_t batch_size = 128;
  std::size_t warmup = 10'000;
  std::size_t buffer_capacity = 1'000'000;

  // Imitation.
  std::size_t imitation_iterations = 300;
  std::size_t imitation_batch_size = 32;
  double imitation_lr = 1e-3;
  std::size_t imitation_holdout = 1000;

  // Evaluation and output.
  std::uint64_t eval_interval_frames = 5'000;
  std::size_t eval_episodes = 5;
  std::size_t snapshot_period = 0;  // generations; 0 disables snapshots
  std::string snapshot_dir = "snapshots";

  void Validate() const;  // throws ConfigError
};

// Applies one key=value setting; throws ConfigError on unknown keys or bad values.
void ApplySetting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
// Parses "key = value" lines; '#' starts a comment.
ExperimentConfig ParseConfigText(const std::string& text, ExperimentConfig base = {});
ExperimentConfig LoadConfigFile(const std::filesystem::path& path, ExperimentConfig base = {});
std::vector<std::string> ConfigKeys();
std::map<std::string, std::string> ConfigToMap(const ExperimentConfig& cfg);

// Which parts a variant wires together.
struct Components {
  bool population = false;
  bool agent = false;
  bool recruitment = false;
  bool imitation = false;
  bool injection = false;
  rl::BehaviorPolicy behavior = rl::BehaviorPolicy::kDual;
  rl::TargetPolicy target = rl::TargetPolicy::kDual;
};

Components DispatchVariant(Variant v);
rl::AgentConfig MakeAgentConfig(const ExperimentConfig& cfg);

struct LogRow {
  std::uint64_t frames = 0;
  std::optional<double> best_pop_score;
  std::optional<double> rl_score;
  std::optional<double> imitator_score;

  // Headline score: the population's best member when there is a population,
  // otherwise the agent.
  std::optional<double> primary() const { return best_pop_score ? best_pop_score : rl_score; }
};

enum class EventKind { kImitation, kImitationSkipped, kInjection };
std::string EventKindName(EventKind k);

struct Event {
  std::uint64_t generation = 0;
  std::uint64_t frames = 0;
  EventKind kind = EventKind::kImitation;
  std::size_t member_index = 0;
  std::optional<double> pre_l1;
  std::optional<double> post_l1;
  // Filled in by the next generation's evaluation and selection.
  std::optional<double> next_fitness;
  std::optional<bool> selected;
};

struct RunLog {
  std::string variant;
  std::string env;
  std::uint64_t seed = 0;
  std::vector<LogRow> rows;
  std::vector<Event> events;
  std::uint64_t training_frames = 0;
  std::uint64_t population_frames = 0;
  std::uint64_t agent_frames = 0;
  std::uint64_t evaluation_frames = 0;
  std::uint64_t generations = 0;
  std::uint64_t train_steps = 0;
  std::uint64_t goal_hits = 0;  // training episodes that reached a terminal goal
};

struct EvalResult {
  double score = 0.0;
  std::uint64_t frames = 0;
};

// The fixed episode seeds used for every evaluation row of a run.
std::vector<std::uint64_t> EvalSeeds(const ExperimentConfig& cfg);

// Mean noise-free return over one episode per seed.
EvalResult Evaluate(const envs::ActionFn& policy, envs::Environment& env,
                    std::span<const std::uint64_t> seeds);
// Scores the best-fitness member among those that carry a fitness.
EvalResult EvaluatePopulation(const evo::Population& pop, envs::Environment& env,
                              std::span<const std::uint64_t> seeds);

// What an evaluation row was computed from. Pointers are null for absent parts.
struct RecordView {
  const LogRow* row = nullptr;
  std::span<const std::uint64_t> eval_seeds;
  const nn::MlpParams* champion = nullptr;
  std::optional<double> champion_fitness;
  const std::vector<double>* generation_fitness = nullptr;  // of the champion's generation
  const rl::DualPolicyAgent* agent = nullptr;
  const nn::MlpParams* imitator = nullptr;
};
using RecordObserver = std::function<void(const RecordView&)>;

RunLog Run(const ExperimentConfig& cfg);
RunLog Run(const ExperimentConfig& cfg, const RecordObserver& on_record);

struct SelectionRate {
  std::size_t events = 0;
  double selected_fraction = 0.0;
  double discarded_fraction = 0.0;
};

// Over resolved imitation events; nullopt when there are none.
std::optional<SelectionRate> SelectionRateReport(const RunLog& log);
std::optional<SelectionRate> SelectionRateReport(std::span<const RunLog> logs);

struct SummaryRow {
  std::string variant;
  std::size_t runs = 0;
  double max = 0.0;     // best primary score seen anywhere in the learning process
  double mean = 0.0;    // of final primary scores
  double median = 0.0;
  double std_percent = 0.0;  // population std / |mean| * 100
};

// One row per variant, in order of first appearance.
std::vector<SummaryRow> AggregateSeeds(std::span<const RunLog> logs);

// Trailing moving average; the first window-1 entries average what exists.
std::vector<double> Smooth(std::span<const double> series, std::size_t window = 10);

std::optional<double> FinalScore(const RunLog& log);

// CSV files.
std::string FormatNumber(double v);
std::string RunLogCsv(const RunLog& log);
std::string EventsCsv(const RunLog& log);
std::string RunInfoCsv(const RunLog& log);
void WriteRunFiles(const RunLog& log, const std::filesystem::path& dir);
RunLog LoadRunFiles(const std::filesystem::path& runlog_csv);
std::string SummaryCsv(std::span<const SummaryRow> rows);
// One row per variant with resolved imitation events, in order of first appearance.
std::string SelectionRateCsv(std::span<const RunLog> logs);

}  // namespace rim::exp
