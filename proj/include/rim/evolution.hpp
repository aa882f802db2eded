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
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "rim/envs.hpp"
#include "rim/neural.hpp"
#include "rim/replay.hpp"
#include "rim/rng.hpp"

namespace rim::evo {

struct Individual {
  nn::MlpParams genome;
  std::optional<double> fitness;
  bool is_elite = false;
};

struct Population {
  std::vector<Individual> members;
  std::size_t elite_count = 1;
  std::uint64_t generation = 0;

  std::size_t size() const { return members.size(); }

  // pop_size random actor-shaped genomes.
  static Population Random(std::size_t pop_size, std::size_t elite_count,
                           const std::vector<std::size_t>& actor_dims, Rng& rng);
};

struct EvolutionConfig {
  std::size_t episodes = 1;
  std::size_t tournament_size = 3;
  double mutation_prob = 0.01;
  double mutation_scale = 0.1;
  double crossover_prob = 0.0;
};

struct FitnessResult {
  double fitness = 0.0;
  std::size_t frames = 0;
  bool reached_goal = false;
};

// Mean undiscounted return over one rollout per seed. Every transition goes
// into buffer. Sets ind.fitness.
FitnessResult EvaluateFitness(Individual& ind, envs::Environment& env,
                              std::span<const std::uint64_t> episode_seeds,
                              ReplayBuffer& buffer);
// Seeds seed, seed + 1, ..., seed + episodes - 1.
FitnessResult EvaluateFitness(Individual& ind, envs::Environment& env, std::size_t episodes,
                              std::uint64_t seed, ReplayBuffer& buffer);

// Index of the highest-fitness member, ties to the lowest index.
std::size_t BestIndex(const Population& pop);

// Slot-aligned parent choice. Elites (top elite_count by fitness, ties to the
// lower index) keep their own slot; every other slot takes the winner of a
// size-k tournament over the whole population.
struct Selection {
  std::vector<std::size_t> source;  // source[slot] = member index copied into slot
  std::vector<bool> elite;          // elite[slot]
};

Selection SelectIndices(const Population& pop, std::size_t tournament_size, Rng& rng);

// The parent individuals for the next generation, flagged as elite or not.
std::vector<Individual> Select(const Population& pop, Rng& rng, std::size_t tournament_size = 3);

// Perturbs every non-elite genome; elites are left bit-identical.
void Mutate(Population& pop, double per_param_prob, double noise_scale, Rng& rng);

// Per-scalar uniform mix of two same-shaped genomes; child fitness unset.
Individual Crossover(const Individual& a, const Individual& b, Rng& rng);

struct GenerationResult {
  Individual champion;
  std::size_t champion_index = 0;
  std::vector<double> fitness;         // of the evaluated generation
  std::vector<Individual> evaluated;   // the evaluated generation itself
  Selection selection;
  std::size_t frames = 0;
  std::size_t goal_hits = 0;
};

// evaluate -> select -> crossover -> mutate -> generation + 1.
GenerationResult EvolveGeneration(Population& pop, envs::Environment& env,
                                  const EvolutionConfig& cfg,
                                  std::span<const std::uint64_t> episode_seeds, Rng& rng,
                                  ReplayBuffer& buffer);

void SavePopulation(std::ostream& out, const Population& pop);
Population LoadPopulation(std::istream& in);

}  // namespace rim::evo
