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

#include "rim/evolution.hpp"

#include <algorithm>
#include <string>

#include "rim/binary_io.hpp"
#include "rim/errors.hpp"

namespace rim::evo {
namespace {

constexpr char kPopulationMagic[5] = "RIMP";
constexpr std::uint32_t kPopulationVersion = 1;

void RequireFitness(const Population& pop) {
  Require(!pop.members.empty(), "population is empty");
  for (std::size_t i = 0; i < pop.size(); ++i) {
    Require(pop.members[i].fitness.has_value(),
            "member " + std::to_string(i) + " has no fitness; evaluate first");
  }
}

// Strictly better fitness, or equal fitness at a lower index.
bool Beats(const Population& pop, std::size_t a, std::size_t b) {
  const double fa = *pop.members[a].fitness;
  const double fb = *pop.members[b].fitness;
  return fa > fb || (fa == fb && a < b);
}

}  // namespace

Population Population::Random(std::size_t pop_size, std::size_t elite_count,
                              const std::vector<std::size_t>& actor_dims, Rng& rng) {
  Require(pop_size >= 1, "population needs at least one member");
  Require(elite_count >= 1 && elite_count <= pop_size,
          "elite_count must lie in [1, pop_size]");
  Population pop;
  pop.elite_count = elite_count;
  pop.members.reserve(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    pop.members.push_back(
        {nn::MlpParams::RandomInit(actor_dims, nn::Activation::kTanh, rng), std::nullopt, false});
  }
  return pop;
}

FitnessResult EvaluateFitness(Individual& ind, envs::Environment& env,
                              std::span<const std::uint64_t> episode_seeds,
                              ReplayBuffer& buffer) {
  Require(!episode_seeds.empty(), "fitness evaluation needs at least one episode");
  Require(ind.genome.output_dim() == env.spec().act_dim,
          "genome output dim does not match env act_dim");
  const auto policy = envs::NetworkPolicy(ind.genome);
  FitnessResult result;
  double total = 0.0;
  for (std::uint64_t seed : episode_seeds) {
    const auto rollout = envs::Rollout(env, policy, seed, false, &buffer);
    total += rollout.episode_return;
    result.frames += rollout.steps;
    result.reached_goal = result.reached_goal || rollout.reached_goal;
  }
  result.fitness = total / static_cast<double>(episode_seeds.size());
  ind.fitness = result.fitness;
  return result;
}

FitnessResult EvaluateFitness(Individual& ind, envs::Environment& env, std::size_t episodes,
                              std::uint64_t seed, ReplayBuffer& buffer) {
  std::vector<std::uint64_t> seeds(episodes);
  for (std::size_t k = 0; k < episodes; ++k) seeds[k] = seed + k;
  return EvaluateFitness(ind, env, seeds, buffer);
}

std::size_t BestIndex(const Population& pop) {
  RequireFitness(pop);
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i) {
    if (Beats(pop, i, best)) best = i;
  }
  return best;
}

Selection SelectIndices(const Population& pop, std::size_t tournament_size, Rng& rng) {
  RequireFitness(pop);
  Require(tournament_size >= 1, "tournament size must be positive");
  const std::size_t n = pop.size();
  Require(pop.elite_count >= 1 && pop.elite_count <= n, "elite_count must lie in [1, pop_size]");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return Beats(pop, a, b); });

  Selection sel{std::vector<std::size_t>(n), std::vector<bool>(n, false)};
  for (std::size_t r = 0; r < pop.elite_count; ++r) {
    sel.source[order[r]] = order[r];
    sel.elite[order[r]] = true;
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t slot = 0; slot < n; ++slot) {
    if (sel.elite[slot]) continue;
    std::size_t winner = pick(rng);
    for (std::size_t k = 1; k < tournament_size; ++k) {
      const std::size_t challenger = pick(rng);
      if (Beats(pop, challenger, winner)) winner = challenger;
    }
    sel.source[slot] = winner;
  }
  return sel;
}

std::vector<Individual> Select(const Population& pop, Rng& rng, std::size_t tournament_size) {
  const Selection sel = SelectIndices(pop, tournament_size, rng);
  std::vector<Individual> parents;
  parents.reserve(pop.size());
  for (std::size_t slot = 0; slot < pop.size(); ++slot) {
    Individual parent = pop.members[sel.source[slot]];
    parent.is_elite = sel.elite[slot];
    parents.push_back(std::move(parent));
  }
  return parents;
}

void Mutate(Population& pop, double per_param_prob, double noise_scale, Rng& rng) {
  for (auto& member : pop.members) {
    if (member.is_elite) continue;
    member.genome = nn::PerturbParams(member.genome, per_param_prob, noise_scale, rng);
    if (per_param_prob > 0.0) member.fitness.reset();
  }
}

Individual Crossover(const Individual& a, const Individual& b, Rng& rng) {
  Require(a.genome.SameShape(b.genome), "crossover between differently shaped genomes");
  Individual child{a.genome, std::nullopt, false};
  const std::vector<double> other = nn::Flatten(b.genome);
  std::size_t i = 0;
  std::bernoulli_distribution coin(0.5);
  nn::ForEachScalar(child.genome, [&](double& v) {
    if (coin(rng)) v = other[i];
    ++i;
  });
  return child;
}

GenerationResult EvolveGeneration(Population& pop, envs::Environment& env,
                                  const EvolutionConfig& cfg,
                                  std::span<const std::uint64_t> episode_seeds, Rng& rng,
                                  ReplayBuffer& buffer) {
  Require(cfg.crossover_prob >= 0.0 && cfg.crossover_prob <= 1.0,
          "crossover probability must lie in [0, 1]");
  GenerationResult result;
  result.fitness.reserve(pop.size());
  for (auto& member : pop.members) {
    const FitnessResult f = EvaluateFitness(member, env, episode_seeds, buffer);
    result.frames += f.frames;
    if (f.reached_goal) ++result.goal_hits;
    result.fitness.push_back(f.fitness);
  }
  result.champion_index = BestIndex(pop);
  result.champion = pop.members[result.champion_index];
  result.evaluated = pop.members;

  result.selection = SelectIndices(pop, cfg.tournament_size, rng);
  std::vector<Individual> next;
  next.reserve(pop.size());
  for (std::size_t slot = 0; slot < pop.size(); ++slot) {
    Individual ind = pop.members[result.selection.source[slot]];
    ind.is_elite = result.selection.elite[slot];
    next.push_back(std::move(ind));
  }
  if (cfg.crossover_prob > 0.0) {
    std::uniform_int_distribution<std::size_t> partner(0, next.size() - 1);
    for (std::size_t slot = 0; slot < next.size(); ++slot) {
      if (next[slot].is_elite || Uniform01(rng) >= cfg.crossover_prob) continue;
      const Individual& mate = next[partner(rng)];
      next[slot] = Crossover(next[slot], mate, rng);
    }
  }
  pop.members = std::move(next);
  Mutate(pop, cfg.mutation_prob, cfg.mutation_scale, rng);
  ++pop.generation;
  result.champion.is_elite = true;
  return result;
}

void SavePopulation(std::ostream& out, const Population& pop) {
  io::WriteHeader(out, kPopulationMagic, kPopulationVersion);
  io::Write<std::uint64_t>(out, pop.generation);
  io::Write<std::uint64_t>(out, pop.elite_count);
  io::Write<std::uint64_t>(out, pop.members.size());
  for (const auto& m : pop.members) {
    io::Write<std::uint8_t>(out, m.fitness.has_value() ? 1 : 0);
    io::Write<double>(out, m.fitness.value_or(0.0));
    io::Write<std::uint8_t>(out, m.is_elite ? 1 : 0);
    nn::SaveParams(out, m.genome);
  }
}

Population LoadPopulation(std::istream& in) {
  const std::uint32_t version = io::ReadHeader(in, kPopulationMagic);
  Require(version == kPopulationVersion, "unsupported population format version");
  Population pop;
  pop.generation = io::Read<std::uint64_t>(in);
  pop.elite_count = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  const auto n = io::Read<std::uint64_t>(in);
  pop.members.resize(static_cast<std::size_t>(n));
  for (auto& m : pop.members) {
    const bool has_fitness = io::Read<std::uint8_t>(in) != 0;
    const double fitness = io::Read<double>(in);
    if (has_fitness) m.fitness = fitness;
    m.is_elite = io::Read<std::uint8_t>(in) != 0;
    m.genome = nn::LoadParams(in);
  }
  return pop;
}

}  // namespace rim::evo
