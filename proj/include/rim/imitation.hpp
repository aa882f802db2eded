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
#include <functional>
#include <span>
#include <vector>

#include "rim/agent.hpp"
#include "rim/evolution.hpp"
#include "rim/neural.hpp"
#include "rim/replay.hpp"
#include "rim/rng.hpp"

// Off-policy imitation: a population actor regresses onto the dual-policy
// agent's noise-free actions at states drawn from the shared replay buffer.
// There is no relabeling or data aggregation loop.
namespace rim::il {

struct ImitationConfig {
  std::size_t iterations = 300;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  // Imitation runs only once len(buffer) > warmup.
  std::size_t warmup = 10'000;

  void Validate() const;
};

// Maps a (obs_dim x n) batch of states to (act_dim x n) expert actions.
using Expert = std::function<nn::Matrix(const nn::Matrix&)>;

struct ImitationResult {
  nn::MlpParams trained;
  bool skipped = false;
  std::vector<double> losses;  // per-iteration mean L1 training loss
};

// (1/K) sum_k |policy(s_k) - expert(s_k)|_1 over the columns of states.
double MeanL1(const nn::MlpParams& policy, const Expert& expert, const nn::Matrix& states);

ImitationResult Imitate(const nn::MlpParams& worst, const Expert& expert,
                        const ReplayBuffer& buffer, const ImitationConfig& cfg, Rng& rng);

// The agent is only read; its networks never change.
ImitationResult Imitate(const nn::MlpParams& worst, const rl::DualPolicyAgent& agent,
                        const ReplayBuffer& buffer, const ImitationConfig& cfg, Rng& rng);

Expert AgentExpert(const rl::DualPolicyAgent& agent);

// Lowest-fitness member, ties to the lowest index.
std::size_t PickWorst(const evo::Population& pop);
// Same over a fitness list, skipping excluded slots unless all are excluded.
std::size_t PickWorst(std::span<const double> fitness, const std::vector<bool>& excluded);

}  // namespace rim::il
