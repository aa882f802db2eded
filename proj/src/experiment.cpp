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

#include <filesystem>
#include <fstream>

#include "rim/errors.hpp"
#include "rim/experiment.hpp"
#include "rim/imitation.hpp"

namespace rim::exp {

Components DispatchVariant(Variant v) {
  Components c;
  switch (v) {
    case Variant::kRim:
    case Variant::kRimIL:
    case Variant::kRimEA:
    case Variant::kRimPG:
      c.population = true;
      c.agent = true;
      c.recruitment = true;
      c.imitation = v != Variant::kRimIL;
      c.injection = true;
      c.behavior = rl::BehaviorPolicy::kDual;
      c.target = v == Variant::kRimEA   ? rl::TargetPolicy::kGradientOnly
                 : v == Variant::kRimPG ? rl::TargetPolicy::kRecruitedOnly
                                        : rl::TargetPolicy::kDual;
      break;
    case Variant::kErl:
      c.population = true;
      c.agent = true;
      c.injection = true;
      c.behavior = rl::BehaviorPolicy::kGradientOnly;
      c.target = rl::TargetPolicy::kGradientOnly;
      break;
    case Variant::kDdpg:
      c.agent = true;
      c.behavior = rl::BehaviorPolicy::kGradientOnly;
      c.target = rl::TargetPolicy::kGradientOnly;
      break;
    case Variant::kEa:
      c.population = true;
      break;
  }
  return c;
}

rl::AgentConfig MakeAgentConfig(const ExperimentConfig& cfg) {
  const Components comps = DispatchVariant(cfg.variant);
  rl::AgentConfig a;
  a.hidden = cfg.hidden;
  a.gamma = cfg.gamma;
  a.tau0 = cfg.tau0;
  a.tau1 = cfg.tau1;
  a.actor_lr = cfg.actor_lr;
  a.critic_lr = cfg.critic_lr;
  a.noise_sigma = cfg.noise_sigma;
  a.batch_size = cfg.batch_size;
  a.warmup = cfg.warmup;
  a.recruitment = cfg.recruitment;
  a.behavior = comps.behavior;
  a.target = comps.target;
  return a;
}

std::vector<std::uint64_t> EvalSeeds(const ExperimentConfig& cfg) {
  Rng eval_rng = ChildStream(cfg.seed, "eval");
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < cfg.eval_episodes; ++i) seeds.push_back(eval_rng());
  return seeds;
}

EvalResult Evaluate(const envs::ActionFn& policy, envs::Environment& env,
                    std::span<const std::uint64_t> seeds) {
  Require(!seeds.empty(), "evaluation needs at least one episode");
  EvalResult result;
  double total = 0.0;
  for (std::uint64_t seed : seeds) {
    const auto r = envs::Rollout(env, policy, seed, false);
    total += r.episode_return;
    result.frames += r.steps;
  }
  result.score = total / static_cast<double>(seeds.size());
  return result;
}

EvalResult EvaluatePopulation(const evo::Population& pop, envs::Environment& env,
                              std::span<const std::uint64_t> seeds) {
  const evo::Individual* best = nullptr;
  for (const auto& m : pop.members) {
    if (m.fitness && (best == nullptr || *m.fitness > *best->fitness)) best = &m;
  }
  Require(best != nullptr, "no member of the population has been evaluated");
  return Evaluate(envs::NetworkPolicy(best->genome), env, seeds);
}

namespace {

// Training loop state shared by the population and agent-only paths.
class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const RecordObserver& on_record)
      : cfg_(cfg),
        on_record_(on_record),
        comps_(DispatchVariant(cfg.variant)),
        env_(envs::MakeEnv(cfg.env)),
        eval_env_(env_->Clone()),
        buffer_(env_->spec().obs_dim, env_->spec().act_dim, cfg.buffer_capacity),
        ea_rng_(ChildStream(cfg.seed, "ea")),
        env_rng_(ChildStream(cfg.seed, "env")),
        agent_env_rng_(ChildStream(cfg.seed, "agent-env")),
        sampler_rng_(ChildStream(cfg.seed, "sampler")),
        imitation_rng_(ChildStream(cfg.seed, "imitation")) {
    const auto& spec = env_->spec();
    eval_seeds_ = EvalSeeds(cfg);
    if (comps_.population) {
      Rng init = ChildStream(cfg.seed, "population-init");
      pop_ = evo::Population::Random(cfg.pop_size, cfg.elite_count,
                                     rl::ActorDims(spec.obs_dim, spec.act_dim, cfg.hidden), init);
    }
    if (comps_.agent) {
      agent_.emplace(spec.obs_dim, spec.act_dim, MakeAgentConfig(cfg),
                     ChildStream(cfg.seed, "agent")());
    }
    log_.variant = VariantName(cfg.variant);
    log_.env = cfg.env;
    log_.seed = cfg.seed;
    next_eval_ = cfg.eval_interval_frames;
  }

  RunLog Execute() {
    while (frames_ < cfg_.total_frames) {
      if (pop_) {
        Generation();
      } else {
        AgentEpisode();
      }
      if (frames_ >= next_eval_) {
        Record();
        next_eval_ = (frames_ / cfg_.eval_interval_frames + 1) * cfg_.eval_interval_frames;
      }
    }
    if (log_.rows.empty() || log_.rows.back().frames != frames_) Record();
    log_.training_frames = frames_;
    if (agent_) log_.train_steps = agent_->train_steps();
    return std::move(log_);
  }

 private:
  void AgentEpisode() {
    rl::DualPolicyAgent& agent = *agent_;
    const auto on_step = [&](const Transition&) { agent.TrainStep(buffer_, sampler_rng_); };
    const auto r = envs::Rollout(*env_, agent.AsPolicy(), agent_env_rng_(), true, &buffer_, on_step);
    frames_ += r.steps;
    log_.agent_frames += r.steps;
    if (r.reached_goal) ++log_.goal_hits;
  }

  void Generation() {
    evo::Population& pop = *pop_;
    evo::EvolutionConfig evo_cfg;
    evo_cfg.episodes = cfg_.fitness_episodes;
    evo_cfg.tournament_size = cfg_.tournament_size;
    evo_cfg.mutation_prob = cfg_.mutation_prob;
    evo_cfg.mutation_scale = cfg_.mutation_scale;
    evo_cfg.crossover_prob = cfg_.crossover_prob;
    std::vector<std::uint64_t> seeds(cfg_.fitness_episodes);
    for (auto& s : seeds) s = env_rng_();

    const auto gen = evo::EvolveGeneration(pop, *env_, evo_cfg, seeds, ea_rng_, buffer_);
    frames_ += gen.frames;
    log_.population_frames += gen.frames;
    log_.goal_hits += gen.goal_hits;
    log_.generations = pop.generation;
    ResolvePending(gen);
    champion_ = gen.champion.genome;
    champion_fitness_ = gen.champion.fitness;
    generation_fitness_ = gen.fitness;

    if (agent_) {
      if (comps_.recruitment) agent_->Recruit(gen.champion.genome);
      for (std::size_t e = 0; e < cfg_.rl_episodes_per_generation; ++e) AgentEpisode();
    }

    const std::uint64_t g = pop.generation;
    const std::size_t worst = il::PickWorst(gen.fitness, gen.selection.elite);
    if (comps_.imitation && g % cfg_.imitation_period == 0) {
      Imitation(gen.evaluated[worst].genome, worst);
    } else if (comps_.injection && g % cfg_.injection_period == 0) {
      pop.members[worst] = {agent_->gradient_actor(), std::nullopt, false};
      Event ev;
      ev.generation = g;
      ev.frames = frames_;
      ev.kind = EventKind::kInjection;
      ev.member_index = worst;
      pending_.push_back(log_.events.size());
      log_.events.push_back(ev);
    }

    if (cfg_.snapshot_period > 0 && g % cfg_.snapshot_period == 0) Snapshot(g);
  }

  void Imitation(const nn::MlpParams& trainee, std::size_t slot) {
    il::ImitationConfig il_cfg;
    il_cfg.iterations = cfg_.imitation_iterations;
    il_cfg.batch_size = cfg_.imitation_batch_size;
    il_cfg.learning_rate = cfg_.imitation_lr;
    il_cfg.warmup = cfg_.warmup;
    Event ev;
    ev.generation = pop_->generation;
    ev.frames = frames_;
    ev.member_index = slot;
    if (buffer_.size() <= il_cfg.warmup) {
      ev.kind = EventKind::kImitationSkipped;
      log_.events.push_back(ev);
      return;
    }
    const nn::Matrix held_out = buffer_.SampleStates(cfg_.imitation_holdout, imitation_rng_);
    const il::Expert expert = il::AgentExpert(*agent_);
    ev.pre_l1 = il::MeanL1(trainee, expert, held_out);
    auto result = il::Imitate(trainee, expert, buffer_, il_cfg, imitation_rng_);
    ev.post_l1 = il::MeanL1(result.trained, expert, held_out);
    imitator_ = result.trained;
    pop_->members[slot] = {std::move(result.trained), std::nullopt, false};
    pending_.push_back(log_.events.size());
    log_.events.push_back(ev);
  }

  // An injected member survives if any slot of the next population copies it.
  void ResolvePending(const evo::GenerationResult& gen) {
    for (std::size_t idx : pending_) {
      Event& ev = log_.events[idx];
      ev.next_fitness = gen.fitness[ev.member_index];
      bool kept = false;
      for (std::size_t src : gen.selection.source) kept = kept || src == ev.member_index;
      ev.selected = kept;
    }
    pending_.clear();
  }

  void Record() {
    LogRow row;
    row.frames = frames_;
    if (pop_ && champion_) {
      const auto r = Evaluate(envs::NetworkPolicy(*champion_), *eval_env_, eval_seeds_);
      row.best_pop_score = r.score;
      log_.evaluation_frames += r.frames;
    }
    if (agent_) {
      const auto r = Evaluate(agent_->AsPolicy(), *eval_env_, eval_seeds_);
      row.rl_score = r.score;
      log_.evaluation_frames += r.frames;
    }
    if (imitator_) {
      const auto r = Evaluate(envs::NetworkPolicy(*imitator_), *eval_env_, eval_seeds_);
      row.imitator_score = r.score;
      log_.evaluation_frames += r.frames;
    }
    log_.rows.push_back(row);
    if (on_record_) {
      RecordView view;
      view.row = &log_.rows.back();
      view.eval_seeds = eval_seeds_;
      if (champion_) {
        view.champion = &*champion_;
        view.champion_fitness = champion_fitness_;
        view.generation_fitness = &generation_fitness_;
      }
      if (agent_) view.agent = &*agent_;
      if (imitator_) view.imitator = &*imitator_;
      on_record_(view);
    }
  }

  void Snapshot(std::uint64_t generation) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg_.snapshot_dir);
    fs::create_directories(dir);
    const std::string stem = log_.variant + "_" + std::to_string(cfg_.seed) + "_gen" +
                             std::to_string(generation);
    std::ofstream pop_out(dir / ("population_" + stem + ".bin"), std::ios::binary);
    evo::SavePopulation(pop_out, *pop_);
    if (agent_) {
      std::ofstream agent_out(dir / ("agent_" + stem + ".bin"), std::ios::binary);
      agent_->SaveCheckpoint(agent_out);
    }
  }

  const ExperimentConfig& cfg_;
  const RecordObserver& on_record_;
  Components comps_;
  std::unique_ptr<envs::Environment> env_;
  std::unique_ptr<envs::Environment> eval_env_;
  ReplayBuffer buffer_;
  Rng ea_rng_;
  Rng env_rng_;
  Rng agent_env_rng_;
  Rng sampler_rng_;
  Rng imitation_rng_;
  std::vector<std::uint64_t> eval_seeds_;
  std::optional<evo::Population> pop_;
  std::optional<rl::DualPolicyAgent> agent_;
  std::optional<nn::MlpParams> champion_;
  std::optional<double> champion_fitness_;
  std::vector<double> generation_fitness_;
  std::optional<nn::MlpParams> imitator_;
  std::vector<std::size_t> pending_;
  std::uint64_t frames_ = 0;
  std::uint64_t next_eval_ = 0;
  RunLog log_;
};

}  // namespace

RunLog Run(const ExperimentConfig& cfg, const RecordObserver& on_record) {
  cfg.Validate();
  Runner runner(cfg, on_record);
  return runner.Execute();
}

RunLog Run(const ExperimentConfig& cfg) { return Run(cfg, RecordObserver{}); }

}  // namespace rim::exp
