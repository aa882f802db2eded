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
#include <vector>

#include "rim/envs.hpp"
#include "rim/neural.hpp"
#include "rim/replay.hpp"
#include "rim/rng.hpp"

namespace rim::rl {

// Soft: the target recruitment actor tracks the recruited actor with rate
// tau0. Hard: recruiting overwrites both the recruited actor and its target.
enum class RecruitmentMode { kSoft, kHard };

// Which actors act in the environment: the critic's argmax over both, or the
// gradient actor alone (plain DDPG).
enum class BehaviorPolicy { kDual, kGradientOnly };

// Which target actors feed the bootstrap term.
enum class TargetPolicy { kDual, kGradientOnly, kRecruitedOnly };

struct AgentConfig {
  std::vector<std::size_t> hidden = {64, 64};
  double gamma = 0.99;
  double tau0 = 0.001;  // target recruitment actor
  double tau1 = 0.001;  // target critic and target gradient actor
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double noise_sigma = 0.1;
  std::size_t batch_size = 128;
  std::size_t warmup = 10'000;  // train only once len(buffer) > warmup
  RecruitmentMode recruitment = RecruitmentMode::kSoft;
  BehaviorPolicy behavior = BehaviorPolicy::kDual;
  TargetPolicy target = TargetPolicy::kDual;

  void Validate() const;
};

struct TrainStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

struct ActionChoice {
  nn::Vector action;
  double q_gradient = 0.0;
  double q_recruited = 0.0;
  bool from_gradient_actor = true;
};

struct LossGradient {
  double value = 0.0;
  nn::MlpParams grads;
};

struct TargetCandidates {
  nn::Vector q_gradient;   // Q'(s', pi_pg'(s'))
  nn::Vector q_recruited;  // Q'(s', pi_ea'(s'))
};

// Two actors and one critic. The gradient actor learns by deterministic policy
// gradient; the recruitment actor is only ever overwritten by Recruit.
class DualPolicyAgent {
 public:
  DualPolicyAgent(std::size_t obs_dim, std::size_t act_dim, AgentConfig cfg, std::uint64_t seed);

  const AgentConfig& config() const { return cfg_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }

  const nn::MlpParams& gradient_actor() const { return pg_actor_; }
  const nn::MlpParams& recruited_actor() const { return ea_actor_; }
  const nn::MlpParams& critic() const { return critic_; }
  const nn::MlpParams& target_gradient_actor() const { return target_pg_actor_; }
  const nn::MlpParams& target_recruited_actor() const { return target_ea_actor_; }
  const nn::MlpParams& target_critic() const { return target_critic_; }
  std::uint64_t train_steps() const { return train_steps_; }

  // Direct network access for tests and tools; bypasses the agent's rules.
  nn::MlpParams& mutable_gradient_actor() { return pg_actor_; }
  nn::MlpParams& mutable_critic() { return critic_; }
  nn::MlpParams& mutable_target_critic() { return target_critic_; }

  double QValue(const nn::Vector& state, const nn::Vector& action) const;

  // Behavior policy without noise. Ties go to the gradient actor.
  ActionChoice Choose(const nn::Vector& state) const;
  nn::Vector SelectAction(const nn::Vector& state) const { return Choose(state).action; }
  // Column-wise SelectAction over a batch of states.
  nn::Matrix SelectActions(const nn::Matrix& states) const;

  // SelectAction plus N(0, noise_sigma^2), clipped to [-1, 1].
  nn::Vector ExploreAction(const nn::Vector& state);

  void Recruit(const nn::MlpParams& champion);

  TargetCandidates ComputeTargetCandidates(const TransitionBatch& batch) const;
  // y = r + gamma * bootstrap, bootstrap zeroed on terminal transitions.
  nn::Vector ComputeTarget(const TransitionBatch& batch) const;

  // Critic: value is the mean squared TD error, grads its gradient.
  LossGradient CriticGradient(const TransitionBatch& batch) const;
  // Actor: value is mean Q(s, pi_pg(s)), grads the gradient of its negation.
  LossGradient ActorGradient(const TransitionBatch& batch) const;
  // Each returns the pre-step value and applies one Adam step.
  double UpdateCritic(const TransitionBatch& batch);
  double UpdateActor(const TransitionBatch& batch);
  void UpdateTargets();

  // No-op (nullopt) while len(buffer) <= warmup.
  std::optional<TrainStats> TrainStep(const ReplayBuffer& buffer, Rng& sampler);

  envs::ActionFn AsPolicy();

  void SaveCheckpoint(std::ostream& out) const;
  static DualPolicyAgent LoadCheckpoint(std::istream& in);

 private:
  DualPolicyAgent() = default;
  nn::Matrix CriticInput(const nn::Matrix& states, const nn::Matrix& actions) const;

  AgentConfig cfg_;
  std::size_t obs_dim_ = 0;
  std::size_t act_dim_ = 0;
  nn::MlpParams pg_actor_;
  nn::MlpParams ea_actor_;
  nn::MlpParams critic_;
  nn::MlpParams target_pg_actor_;
  nn::MlpParams target_ea_actor_;
  nn::MlpParams target_critic_;
  nn::AdamState actor_opt_;
  nn::AdamState critic_opt_;
  Rng noise_rng_;
  std::uint64_t train_steps_ = 0;
};

std::vector<std::size_t> ActorDims(std::size_t obs_dim, std::size_t act_dim,
                                   const std::vector<std::size_t>& hidden);
std::vector<std::size_t> CriticDims(std::size_t obs_dim, std::size_t act_dim,
                                    const std::vector<std::size_t>& hidden);

}  // namespace rim::rl
