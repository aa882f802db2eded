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

#include <cmath>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "rim/errors.hpp"
#include "rim/experiment.hpp"

namespace rim::exp {
namespace {

ExperimentConfig Tiny(Variant v, std::uint64_t seed = 0) {
  ExperimentConfig cfg;
  cfg.variant = v;
  cfg.env = "PointMass1D";
  cfg.seed = seed;
  cfg.total_frames = 6000;
  cfg.pop_size = 4;
  cfg.hidden = {16, 16};
  cfg.batch_size = 16;
  cfg.warmup = 300;
  cfg.imitation_period = 2;
  cfg.injection_period = 3;
  cfg.imitation_iterations = 20;
  cfg.imitation_holdout = 100;
  cfg.eval_interval_frames = 1000;
  return cfg;
}

std::size_t CountEvents(const RunLog& log, EventKind kind) {
  std::size_t n = 0;
  for (const auto& e : log.events) n += e.kind == kind ? 1 : 0;
  return n;
}

TEST(Dispatch, VariantWiring) {
  const Components rim = DispatchVariant(Variant::kRim);
  EXPECT_TRUE(rim.population && rim.agent && rim.recruitment && rim.imitation && rim.injection);
  EXPECT_EQ(rim.target, rl::TargetPolicy::kDual);
  EXPECT_FALSE(DispatchVariant(Variant::kRimIL).imitation);
  EXPECT_TRUE(DispatchVariant(Variant::kRimIL).injection);
  EXPECT_EQ(DispatchVariant(Variant::kRimEA).target, rl::TargetPolicy::kGradientOnly);
  EXPECT_EQ(DispatchVariant(Variant::kRimEA).behavior, rl::BehaviorPolicy::kDual);
  EXPECT_EQ(DispatchVariant(Variant::kRimPG).target, rl::TargetPolicy::kRecruitedOnly);
  const Components erl = DispatchVariant(Variant::kErl);
  EXPECT_TRUE(erl.population && erl.agent && erl.injection);
  EXPECT_FALSE(erl.recruitment || erl.imitation);
  EXPECT_EQ(erl.behavior, rl::BehaviorPolicy::kGradientOnly);
  const Components ddpg = DispatchVariant(Variant::kDdpg);
  EXPECT_FALSE(ddpg.population);
  EXPECT_TRUE(ddpg.agent);
  const Components ea = DispatchVariant(Variant::kEa);
  EXPECT_TRUE(ea.population);
  EXPECT_FALSE(ea.agent || ea.imitation || ea.injection);
}

TEST(Config, VariantNamesRoundTrip) {
  for (Variant v : AllVariants()) EXPECT_EQ(ParseVariant(VariantName(v)), v);
  EXPECT_THROW(ParseVariant("TD3"), ConfigError);
}

TEST(Config, ParsesKeyValueText) {
  const ExperimentConfig cfg = ParseConfigText(
      "# comment\n"
      "variant = RIM-PG\n"
      "env=Pendulum   # trailing\n"
      "\n"
      "pop_size = 6\n"
      "mutation_prob = 0.05\n"
      "recruitment = hard\n"
      "hidden = 32,16\n");
  EXPECT_EQ(cfg.variant, Variant::kRimPG);
  EXPECT_EQ(cfg.env, "Pendulum");
  EXPECT_EQ(cfg.pop_size, 6u);
  EXPECT_EQ(cfg.mutation_prob, 0.05);
  EXPECT_EQ(cfg.recruitment, rl::RecruitmentMode::kHard);
  EXPECT_EQ(cfg.hidden, (std::vector<std::size_t>{32, 16}));
  EXPECT_EQ(cfg.total_frames, 150000u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(ParseConfigText("no_such_key = 1\n"), ConfigError);
  EXPECT_THROW(ParseConfigText("pop_size = ten\n"), ConfigError);
  EXPECT_THROW(ParseConfigText("pop_size = -3\n"), ConfigError);
  EXPECT_THROW(ParseConfigText("gamma\n"), ConfigError);
  EXPECT_THROW(ParseConfigText("recruitment = medium\n"), ConfigError);
  EXPECT_THROW(LoadConfigFile("/nonexistent/rim.cfg"), ConfigError);
}

TEST(Config, ValidateCatchesRanges) {
  ExperimentConfig cfg;
  cfg.Validate();
  cfg.elite_count = 11;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.imitation_period = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.eval_interval_frames = cfg.total_frames + 1;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.env = "Walker2d";
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.gamma = 0.0;
  EXPECT_THROW(exp::Run(cfg), ConfigError);
}

TEST(Config, MapRoundTrips) {
  ExperimentConfig cfg = Tiny(Variant::kErl, 9);
  cfg.noise_sigma = 0.123456789;
  std::string text;
  for (const auto& [k, v] : ConfigToMap(cfg)) text += k + "=" + v + "\n";
  EXPECT_EQ(ConfigToMap(ParseConfigText(text)), ConfigToMap(cfg));
  EXPECT_EQ(ConfigKeys().size(), ConfigToMap(cfg).size());
}

TEST(Evaluate, IdenticalSeedsMatchSingleEpisode) {
  auto env = envs::MakeEnv("PointMass2D");
  const auto ctrl = [](const nn::Vector& obs, bool) { return envs::PointMassController(obs); };
  const std::vector<std::uint64_t> one = {4};
  const std::vector<std::uint64_t> five = {4, 4, 4, 4, 4};
  const EvalResult a = Evaluate(ctrl, *env, one);
  const EvalResult b = Evaluate(ctrl, *env, five);
  EXPECT_EQ(a.score, b.score);
  EXPECT_EQ(b.frames, 500u);
}

TEST(Evaluate, ZeroPolicyAtGoalScoresZero) {
  envs::PointMass env(2, false, nn::Vector::Zero(2), 0.0);
  const auto zero = [](const nn::Vector&, bool) { return nn::Vector::Zero(2); };
  const std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  EXPECT_EQ(Evaluate(zero, env, seeds).score, 0.0);
}

TEST(Evaluate, PopulationUsesBestFitnessMember) {
  auto env = envs::MakeEnv("PointMass1D");
  Rng rng(3);
  evo::Population pop = evo::Population::Random(3, 1, {2, 8, 1}, rng);
  pop.members[0].fitness = -5.0;
  pop.members[1].fitness = 2.0;
  pop.members[2].fitness = 1.0;
  const std::vector<std::uint64_t> seeds = {7, 8};
  EXPECT_EQ(EvaluatePopulation(pop, *env, seeds).score,
            Evaluate(envs::NetworkPolicy(pop.members[1].genome), *env, seeds).score);
}

TEST(Run, SameSeedGivesIdenticalCsv) {
  const RunLog a = exp::Run(Tiny(Variant::kRim, 5));
  const RunLog b = exp::Run(Tiny(Variant::kRim, 5));
  EXPECT_EQ(RunLogCsv(a), RunLogCsv(b));
  EXPECT_EQ(EventsCsv(a), EventsCsv(b));
  EXPECT_EQ(RunInfoCsv(a), RunInfoCsv(b));
  EXPECT_NE(RunLogCsv(a), RunLogCsv(exp::Run(Tiny(Variant::kRim, 6))));
}

TEST(Run, FrameAccountingAndCadence) {
  for (Variant v : AllVariants()) {
    const ExperimentConfig cfg = Tiny(v, 1);
    const RunLog log = exp::Run(cfg);
    EXPECT_EQ(log.training_frames, log.population_frames + log.agent_frames) << VariantName(v);
    EXPECT_GE(log.training_frames, cfg.total_frames);
    ASSERT_FALSE(log.rows.empty());
    EXPECT_EQ(log.rows.back().frames, log.training_frames);
    std::uint64_t previous = 0;
    for (std::size_t i = 0; i < log.rows.size(); ++i) {
      EXPECT_GT(log.rows[i].frames, previous);
      if (i + 1 < log.rows.size()) EXPECT_GE(log.rows[i].frames, (i + 1) * cfg.eval_interval_frames);
      previous = log.rows[i].frames;
    }
    EXPECT_EQ(log.evaluation_frames % 100, 0u);
  }
}

TEST(Run, VariantIsolation) {
  const RunLog ea = exp::Run(Tiny(Variant::kEa));
  EXPECT_EQ(ea.train_steps, 0u);
  EXPECT_EQ(ea.agent_frames, 0u);
  EXPECT_TRUE(ea.events.empty());
  for (const auto& r : ea.rows) {
    EXPECT_FALSE(r.rl_score.has_value());
    EXPECT_TRUE(r.best_pop_score.has_value());
  }

  const RunLog ddpg = exp::Run(Tiny(Variant::kDdpg));
  EXPECT_EQ(ddpg.generations, 0u);
  EXPECT_EQ(ddpg.population_frames, 0u);
  for (const auto& r : ddpg.rows) {
    EXPECT_FALSE(r.best_pop_score.has_value());
    EXPECT_TRUE(r.rl_score.has_value());
  }

  const RunLog il = exp::Run(Tiny(Variant::kRimIL));
  EXPECT_EQ(CountEvents(il, EventKind::kImitation), 0u);
  EXPECT_EQ(CountEvents(il, EventKind::kImitationSkipped), 0u);
  EXPECT_GT(CountEvents(il, EventKind::kInjection), 0u);

  const RunLog erl = exp::Run(Tiny(Variant::kErl));
  EXPECT_EQ(CountEvents(erl, EventKind::kImitation), 0u);
  EXPECT_GT(CountEvents(erl, EventKind::kInjection), 0u);
}

TEST(Run, ImitationTakesPrecedenceOverInjection) {
  const RunLog log = exp::Run(Tiny(Variant::kRim));
  EXPECT_GT(CountEvents(log, EventKind::kImitation), 0u);
  for (const auto& e : log.events) {
    if (e.kind == EventKind::kInjection) EXPECT_NE(e.generation % 2, 0u);
    if (e.kind == EventKind::kImitation) {
      EXPECT_EQ(e.generation % 2, 0u);
      ASSERT_TRUE(e.pre_l1 && e.post_l1);
      EXPECT_LT(*e.post_l1, *e.pre_l1);
    }
  }
  for (std::size_t i = 0; i + 1 < log.events.size(); ++i) {
    if (log.events[i].kind != EventKind::kImitationSkipped) {
      EXPECT_TRUE(log.events[i].selected.has_value());
      EXPECT_TRUE(log.events[i].next_fitness.has_value());
    }
  }
  for (const auto& r : log.rows) {
    if (r.frames > 3000) EXPECT_TRUE(r.imitator_score.has_value());
  }
}

TEST(Report, SingleLogSummary) {
  RunLog log;
  log.variant = "RIM";
  log.rows = {{100, -3.0, std::nullopt, std::nullopt}, {200, -1.0, std::nullopt, std::nullopt},
              {300, -2.0, std::nullopt, std::nullopt}};
  const std::vector<RunLog> logs = {log};
  const auto rows = AggregateSeeds(logs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].max, -1.0);
  EXPECT_EQ(rows[0].mean, -2.0);
  EXPECT_EQ(rows[0].median, -2.0);
  EXPECT_EQ(rows[0].std_percent, 0.0);
  EXPECT_EQ(rows[0].runs, 1u);
}

TEST(Report, StdPercentOfThreeFinals) {
  std::vector<RunLog> logs;
  for (double f : {1.0, 3.0, 2.0}) {
    RunLog log;
    log.variant = "EA";
    log.rows = {{10, f + 5.0, std::nullopt, std::nullopt}, {20, f, std::nullopt, std::nullopt}};
    logs.push_back(log);
  }
  RunLog other;
  other.variant = "DDPG";
  other.rows = {{10, std::nullopt, 4.0, std::nullopt}};
  logs.push_back(other);
  const auto rows = AggregateSeeds(logs);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].variant, "EA");
  EXPECT_DOUBLE_EQ(rows[0].mean, 2.0);
  EXPECT_DOUBLE_EQ(rows[0].median, 2.0);
  EXPECT_NEAR(rows[0].std_percent, 40.8248290463863, 1e-9);
  EXPECT_EQ(rows[0].max, 8.0);
  EXPECT_EQ(rows[1].mean, 4.0);
}

TEST(Report, SelectionRate) {
  RunLog log;
  EXPECT_FALSE(SelectionRateReport(log).has_value());
  for (bool s : {true, false, true, true}) {
    Event e;
    e.selected = s;
    log.events.push_back(e);
  }
  Event pending;
  log.events.push_back(pending);
  Event injection;
  injection.kind = EventKind::kInjection;
  injection.selected = false;
  log.events.push_back(injection);
  const auto rate = SelectionRateReport(log);
  ASSERT_TRUE(rate.has_value());
  EXPECT_EQ(rate->events, 4u);
  EXPECT_EQ(rate->selected_fraction, 0.75);
  EXPECT_EQ(rate->selected_fraction + rate->discarded_fraction, 1.0);
}

TEST(Report, SmoothIsTrailingMean) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const auto y = Smooth(x);
  EXPECT_EQ(y[0], 1.0);
  EXPECT_EQ(y[1], 1.5);
  EXPECT_EQ(y[9], 5.5);
  EXPECT_EQ(y[11], 7.5);
  EXPECT_THROW(Smooth(x, 0), ContractViolation);
}

TEST(Report, CsvFilesRoundTrip) {
  const RunLog log = exp::Run(Tiny(Variant::kRim, 2));
  const auto dir = std::filesystem::temp_directory_path() / "rim_report_test";
  std::filesystem::remove_all(dir);
  WriteRunFiles(log, dir);
  const RunLog back = LoadRunFiles(dir / "runlog_RIM_2.csv");
  EXPECT_EQ(back.variant, "RIM");
  EXPECT_EQ(back.seed, 2u);
  EXPECT_EQ(RunLogCsv(back), RunLogCsv(log));
  EXPECT_EQ(EventsCsv(back), EventsCsv(log));
  EXPECT_EQ(RunInfoCsv(back), RunInfoCsv(log));
  ASSERT_EQ(back.rows.size(), log.rows.size());
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].best_pop_score, log.rows[i].best_pop_score);
    EXPECT_EQ(back.rows[i].rl_score, log.rows[i].rl_score);
    EXPECT_EQ(back.rows[i].imitator_score, log.rows[i].imitator_score);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace rim::exp
