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
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "rim/agent.hpp"
#include "rim/errors.hpp"
#include "test_support.hpp"

namespace rim::rl {
namespace {

using rim::testing::MaxRelativeError;
using rim::testing::NumericGradient;
using rim::testing::RandomMatrix;

constexpr std::size_t kObs = 3;
constexpr std::size_t kAct = 2;

AgentConfig SmallConfig() {
  AgentConfig cfg;
  cfg.hidden = {16, 16};
  cfg.batch_size = 8;
  cfg.warmup = 20;
  return cfg;
}

TransitionBatch RandomBatch(std::size_t n, Rng& rng) {
  TransitionBatch b;
  b.states = RandomMatrix(kObs, n, rng);
  b.actions = RandomMatrix(kAct, n, rng);
  b.rewards = RandomMatrix(n, 1, rng);
  b.next_states = RandomMatrix(kObs, n, rng);
  b.dones.assign(n, false);
  return b;
}

void FillBuffer(ReplayBuffer& buf, std::size_t n, Rng& rng) {
  for (std::size_t i = 0; i < n; ++i) {
    Transition t;
    t.state = RandomMatrix(kObs, 1, rng);
    t.action = RandomMatrix(kAct, 1, rng);
    t.reward = Uniform01(rng);
    t.next_state = RandomMatrix(kObs, 1, rng);
    t.done = i % 17 == 0;
    buf.Push(t);
  }
}

// Actor whose output is the constant tanh(bias), whatever the state.
nn::MlpParams ConstantActor(double a0, double a1, const AgentConfig& cfg) {
  nn::MlpParams p(ActorDims(kObs, kAct, cfg.hidden), nn::Activation::kTanh);
  p.layers.back().bias << std::atanh(a0), std::atanh(a1);
  return p;
}

// Critic computing Q(s, a) = scale * a[0] for |a[0]| < 10.
nn::MlpParams FirstActionCritic(double scale, const AgentConfig& cfg) {
  nn::MlpParams p(CriticDims(kObs, kAct, cfg.hidden), nn::Activation::kIdentity);
  p.layers[0].weight(0, kObs) = 1.0;
  p.layers[0].bias(0) = 10.0;
  p.layers[1].weight(0, 0) = 1.0;
  p.layers[2].weight(0, 0) = scale;
  p.layers[2].bias(0) = -10.0 * scale;
  return p;
}

bool SameNetworks(const DualPolicyAgent& a, const DualPolicyAgent& b) {
  return nn::BitEqual(a.gradient_actor(), b.gradient_actor()) &&
         nn::BitEqual(a.recruited_actor(), b.recruited_actor()) &&
         nn::BitEqual(a.critic(), b.critic()) &&
         nn::BitEqual(a.target_gradient_actor(), b.target_gradient_actor()) &&
         nn::BitEqual(a.target_recruited_actor(), b.target_recruited_actor()) &&
         nn::BitEqual(a.target_critic(), b.target_critic());
}

TEST(DualPolicyAgent, TargetsStartAsCopies) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 1);
  EXPECT_TRUE(nn::BitEqual(agent.gradient_actor(), agent.target_gradient_actor()));
  EXPECT_TRUE(nn::BitEqual(agent.recruited_actor(), agent.target_recruited_actor()));
  EXPECT_TRUE(nn::BitEqual(agent.critic(), agent.target_critic()));
}

TEST(DualPolicyAgent, InvalidConfigThrows) {
  AgentConfig cfg = SmallConfig();
  cfg.gamma = 1.5;
  EXPECT_THROW(DualPolicyAgent(kObs, kAct, cfg, 0), ContractViolation);
}

TEST(Choose, HigherQWins) {
  const AgentConfig cfg = SmallConfig();
  DualPolicyAgent agent(kObs, kAct, cfg, 2);
  agent.mutable_critic() = FirstActionCritic(4.0, cfg);
  agent.mutable_gradient_actor() = ConstantActor(0.5, 0.1, cfg);
  agent.Recruit(ConstantActor(0.25, -0.1, cfg));
  const ActionChoice c = agent.Choose(nn::Vector::Zero(kObs));
  EXPECT_NEAR(c.q_gradient, 2.0, 1e-12);
  EXPECT_NEAR(c.q_recruited, 1.0, 1e-12);
  EXPECT_TRUE(c.from_gradient_actor);
  EXPECT_NEAR(c.action(1), 0.1, 1e-12);

  agent.Recruit(ConstantActor(0.75, -0.1, cfg));
  const ActionChoice d = agent.Choose(nn::Vector::Zero(kObs));
  EXPECT_FALSE(d.from_gradient_actor);
  EXPECT_NEAR(d.action(1), -0.1, 1e-12);
}

TEST(Choose, TiesGoToGradientActor) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 3);
  agent.Recruit(agent.gradient_actor());
  Rng rng(0);
  for (int i = 0; i < 20; ++i) {
    const ActionChoice c = agent.Choose(RandomMatrix(kObs, 1, rng));
    EXPECT_TRUE(c.from_gradient_actor);
    EXPECT_EQ(c.q_gradient, c.q_recruited);
  }
}

TEST(Choose, MaxOverCandidatesExactly) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 4);
  Rng rng(1);
  agent.Recruit(nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                          nn::Activation::kTanh, rng));
  for (int i = 0; i < 1000; ++i) {
    const nn::Vector s = RandomMatrix(kObs, 1, rng, 2.0);
    const nn::Vector a = agent.SelectAction(s);
    const double q_pg = agent.QValue(s, nn::Predict(agent.gradient_actor(), s));
    const double q_ea = agent.QValue(s, nn::Predict(agent.recruited_actor(), s));
    EXPECT_EQ(agent.QValue(s, a), std::max(q_pg, q_ea));
  }
}

TEST(Choose, InvariantToPositiveCriticScaling) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 5);
  Rng rng(2);
  agent.Recruit(nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                          nn::Activation::kTanh, rng));
  const nn::Matrix states = RandomMatrix(kObs, 200, rng, 2.0);
  std::vector<bool> before;
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    before.push_back(agent.Choose(states.col(i)).from_gradient_actor);
  }
  auto& last = agent.mutable_critic().layers.back();
  last.weight *= 3.5;
  last.bias *= 3.5;
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    EXPECT_EQ(agent.Choose(states.col(i)).from_gradient_actor,
              before[static_cast<std::size_t>(i)]);
  }
}

TEST(Choose, BatchedMatchesSingle) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 6);
  Rng rng(3);
  agent.Recruit(nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                          nn::Activation::kTanh, rng));
  const nn::Matrix states = RandomMatrix(kObs, 50, rng, 2.0);
  const nn::Matrix batched = agent.SelectActions(states);
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    EXPECT_LT((batched.col(i) - agent.SelectAction(states.col(i))).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(ExploreAction, NoiselessEqualsSelect) {
  AgentConfig cfg = SmallConfig();
  cfg.noise_sigma = 0.0;
  DualPolicyAgent agent(kObs, kAct, cfg, 7);
  Rng rng(4);
  const nn::Vector s = RandomMatrix(kObs, 1, rng);
  EXPECT_TRUE(agent.ExploreAction(s) == agent.SelectAction(s));
}

TEST(ExploreAction, ClippedAndReproducible) {
  AgentConfig cfg = SmallConfig();
  cfg.noise_sigma = 5.0;
  DualPolicyAgent a(kObs, kAct, cfg, 8);
  DualPolicyAgent b(kObs, kAct, cfg, 8);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const nn::Vector s = RandomMatrix(kObs, 1, rng);
    const nn::Vector x = a.ExploreAction(s);
    EXPECT_TRUE(x == b.ExploreAction(s));
    EXPECT_LE(x.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Recruit, SoftLeavesTargetAlone) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 9);
  Rng rng(6);
  const auto champ = nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                               nn::Activation::kTanh, rng);
  const nn::MlpParams target_before = agent.target_recruited_actor();
  agent.Recruit(champ);
  EXPECT_TRUE(nn::BitEqual(agent.recruited_actor(), champ));
  EXPECT_TRUE(nn::BitEqual(agent.target_recruited_actor(), target_before));
}

TEST(Recruit, HardOverwritesTarget) {
  AgentConfig cfg = SmallConfig();
  cfg.recruitment = RecruitmentMode::kHard;
  DualPolicyAgent agent(kObs, kAct, cfg, 10);
  Rng rng(7);
  const auto champ = nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                               nn::Activation::kTanh, rng);
  agent.Recruit(champ);
  EXPECT_TRUE(nn::BitEqual(agent.target_recruited_actor(), champ));
  agent.UpdateTargets();
  EXPECT_TRUE(nn::BitEqual(agent.target_recruited_actor(), champ));
}

TEST(Recruit, ShapeMismatchThrows) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 11);
  EXPECT_THROW(agent.Recruit(nn::MlpParams({kObs, 4, kAct}, nn::Activation::kTanh)),
               ContractViolation);
}

TEST(ComputeTarget, HandArithmetic) {
  AgentConfig cfg = SmallConfig();
  cfg.tau0 = 1.0;
  cfg.tau1 = 1.0;
  DualPolicyAgent agent(kObs, kAct, cfg, 12);
  agent.mutable_critic() = FirstActionCritic(4.0, cfg);
  agent.mutable_gradient_actor() = ConstantActor(0.5, 0.0, cfg);
  agent.Recruit(ConstantActor(0.375, 0.0, cfg));
  agent.UpdateTargets();

  Rng rng(8);
  TransitionBatch batch = RandomBatch(2, rng);
  batch.rewards << 1.0, 1.0;
  batch.dones = {false, true};
  const TargetCandidates c = agent.ComputeTargetCandidates(batch);
  EXPECT_NEAR(c.q_gradient(0), 2.0, 1e-12);
  EXPECT_NEAR(c.q_recruited(0), 1.5, 1e-12);
  const nn::Vector y = agent.ComputeTarget(batch);
  EXPECT_NEAR(y(0), 2.98, 1e-12);
  EXPECT_EQ(y(0), 1.0 + 0.99 * c.q_gradient(0));
  EXPECT_EQ(y(1), 1.0);
}

TEST(ComputeTarget, DominatesSingleActorTargets) {
  AgentConfig cfg = SmallConfig();
  cfg.recruitment = RecruitmentMode::kHard;
  DualPolicyAgent agent(kObs, kAct, cfg, 13);
  Rng rng(9);
  agent.Recruit(nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                          nn::Activation::kTanh, rng));
  const TransitionBatch batch = RandomBatch(500, rng);
  const TargetCandidates c = agent.ComputeTargetCandidates(batch);
  const nn::Vector y = agent.ComputeTarget(batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    EXPECT_GE(y(k), batch.rewards(k) + 0.99 * c.q_gradient(k));
    EXPECT_GE(y(k), batch.rewards(k) + 0.99 * c.q_recruited(k));
  }
}

TEST(ComputeTarget, SingleActorVariants) {
  Rng rng(10);
  const TransitionBatch batch = RandomBatch(20, rng);
  const auto champ = nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                               nn::Activation::kTanh, rng);
  for (TargetPolicy t : {TargetPolicy::kGradientOnly, TargetPolicy::kRecruitedOnly}) {
    AgentConfig cfg = SmallConfig();
    cfg.recruitment = RecruitmentMode::kHard;
    cfg.target = t;
    DualPolicyAgent agent(kObs, kAct, cfg, 14);
    agent.Recruit(champ);
    const TargetCandidates c = agent.ComputeTargetCandidates(batch);
    const nn::Vector& q = t == TargetPolicy::kGradientOnly ? c.q_gradient : c.q_recruited;
    const nn::Vector y = agent.ComputeTarget(batch);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      EXPECT_EQ(y(i), batch.rewards(i) + 0.99 * q(i));
    }
  }
}

TEST(UpdateCritic, LossMatchesHandComputation) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 15);
  Rng rng(11);
  TransitionBatch batch = RandomBatch(2, rng);
  batch.dones = {false, true};
  double expected = 0.0;
  for (Eigen::Index i = 0; i < 2; ++i) {
    const nn::Vector next = batch.next_states.col(i);
    const nn::Vector s = batch.states.col(i);
    const nn::Vector a = batch.actions.col(i);
    const auto q_target = [&](const nn::MlpParams& actor) {
      nn::Vector in(kObs + kAct);
      in << next, nn::Predict(actor, next);
      return nn::Predict(agent.target_critic(), in)(0);
    };
    const double boot = std::max(q_target(agent.target_gradient_actor()),
                                 q_target(agent.target_recruited_actor()));
    const double y = batch.rewards(i) + (batch.dones[static_cast<std::size_t>(i)] ? 0.0
                                                                                   : 0.99 * boot);
    const double d = y - agent.QValue(s, a);
    expected += d * d;
  }
  expected /= 2.0;
  EXPECT_NEAR(agent.UpdateCritic(batch), expected, 1e-12);
}

TEST(UpdateCritic, ZeroErrorLeavesCritic) {
  AgentConfig cfg = SmallConfig();
  cfg.gamma = 0.5;
  DualPolicyAgent agent(kObs, kAct, cfg, 16);
  nn::MlpParams zero(CriticDims(kObs, kAct, cfg.hidden), nn::Activation::kIdentity);
  agent.mutable_critic() = zero;
  agent.mutable_target_critic() = zero;
  Rng rng(12);
  TransitionBatch batch = RandomBatch(4, rng);
  batch.rewards.setZero();
  EXPECT_EQ(agent.UpdateCritic(batch), 0.0);
  EXPECT_TRUE(nn::BitEqual(agent.critic(), zero));
}

TEST(UpdateCritic, LossFallsWithFrozenTargets) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 17);
  Rng rng(13);
  const TransitionBatch batch = RandomBatch(16, rng);
  const double first = agent.UpdateCritic(batch);
  double last = first;
  for (int i = 0; i < 99; ++i) last = agent.UpdateCritic(batch);
  EXPECT_LT(last, first);
}

TEST(UpdateCritic, GradientMatchesFiniteDifferences) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 18);
  Rng rng(14);
  const TransitionBatch batch = RandomBatch(6, rng);
  const LossGradient g = agent.CriticGradient(batch);
  DualPolicyAgent probe = agent;
  const auto loss = [&](const nn::MlpParams& critic) {
    probe.mutable_critic() = critic;
    return probe.CriticGradient(batch).value;
  };
  EXPECT_LT(MaxRelativeError(nn::Flatten(g.grads), NumericGradient(agent.critic(), loss)), 1e-4);
}

TEST(UpdateActor, GradientMatchesFiniteDifferences) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 19);
  Rng rng(15);
  const TransitionBatch batch = RandomBatch(6, rng);
  const LossGradient g = agent.ActorGradient(batch);
  DualPolicyAgent probe = agent;
  const auto neg_objective = [&](const nn::MlpParams& actor) {
    probe.mutable_gradient_actor() = actor;
    return -probe.ActorGradient(batch).value;
  };
  EXPECT_LT(MaxRelativeError(nn::Flatten(g.grads),
                             NumericGradient(agent.gradient_actor(), neg_objective)),
            1e-4);
}

TEST(UpdateActor, ConstantCriticLeavesActor) {
  const AgentConfig cfg = SmallConfig();
  DualPolicyAgent agent(kObs, kAct, cfg, 20);
  nn::MlpParams flat(CriticDims(kObs, kAct, cfg.hidden), nn::Activation::kIdentity);
  flat.layers.back().bias(0) = 3.0;
  agent.mutable_critic() = flat;
  const nn::MlpParams before = agent.gradient_actor();
  Rng rng(16);
  EXPECT_EQ(agent.UpdateActor(RandomBatch(8, rng)), 3.0);
  EXPECT_TRUE(nn::BitEqual(agent.gradient_actor(), before));
}

TEST(UpdateActor, ClimbsFixedCritic) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 21);
  Rng rng(17);
  const TransitionBatch batch = RandomBatch(32, rng);
  const nn::MlpParams critic = agent.critic();
  const double first = agent.UpdateActor(batch);
  double last = first;
  for (int i = 0; i < 200; ++i) last = agent.UpdateActor(batch);
  EXPECT_GT(last, first);
  EXPECT_TRUE(nn::BitEqual(agent.critic(), critic));
}

TEST(UpdateTargets, UnitRatesCopy) {
  AgentConfig cfg = SmallConfig();
  cfg.tau0 = 1.0;
  cfg.tau1 = 1.0;
  DualPolicyAgent agent(kObs, kAct, cfg, 22);
  Rng rng(18);
  agent.Recruit(nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                          nn::Activation::kTanh, rng));
  agent.UpdateCritic(RandomBatch(8, rng));
  agent.UpdateActor(RandomBatch(8, rng));
  agent.UpdateTargets();
  EXPECT_TRUE(nn::BitEqual(agent.gradient_actor(), agent.target_gradient_actor()));
  EXPECT_TRUE(nn::BitEqual(agent.recruited_actor(), agent.target_recruited_actor()));
  EXPECT_TRUE(nn::BitEqual(agent.critic(), agent.target_critic()));
}

TEST(UpdateTargets, AffineIdentity) {
  AgentConfig cfg = SmallConfig();
  cfg.tau0 = 0.03;
  cfg.tau1 = 0.2;
  DualPolicyAgent agent(kObs, kAct, cfg, 23);
  Rng rng(19);
  agent.Recruit(nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                          nn::Activation::kTanh, rng));
  agent.UpdateCritic(RandomBatch(8, rng));
  const auto old_ea = nn::Flatten(agent.target_recruited_actor());
  const auto old_q = nn::Flatten(agent.target_critic());
  agent.UpdateTargets();
  const auto ea = nn::Flatten(agent.recruited_actor());
  const auto q = nn::Flatten(agent.critic());
  const auto new_ea = nn::Flatten(agent.target_recruited_actor());
  const auto new_q = nn::Flatten(agent.target_critic());
  for (std::size_t i = 0; i < ea.size(); ++i) {
    EXPECT_LE(std::abs(new_ea[i] - ((1 - 0.03) * old_ea[i] + 0.03 * ea[i])), 1e-12);
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_LE(std::abs(new_q[i] - ((1 - 0.2) * old_q[i] + 0.2 * q[i])), 1e-12);
  }
}

TEST(TrainStep, NoOpBelowWarmup) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 24);
  const DualPolicyAgent before = agent;
  ReplayBuffer buf(kObs, kAct, 100);
  Rng rng(20);
  FillBuffer(buf, 20, rng);
  EXPECT_FALSE(agent.TrainStep(buf, rng).has_value());
  EXPECT_TRUE(SameNetworks(agent, before));
  EXPECT_EQ(agent.train_steps(), 0u);
}

TEST(TrainStep, TouchesOnlyLearnedNetworks) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 25);
  Rng rng(21);
  agent.Recruit(nn::MlpParams::RandomInit(ActorDims(kObs, kAct, {16, 16}),
                                          nn::Activation::kTanh, rng));
  ReplayBuffer buf(kObs, kAct, 100);
  FillBuffer(buf, 50, rng);
  const DualPolicyAgent before = agent;
  DualPolicyAgent twin = agent;
  Rng s1(3);
  Rng s2(3);
  const auto stats = agent.TrainStep(buf, s1);
  ASSERT_TRUE(stats.has_value());
  twin.TrainStep(buf, s2);
  EXPECT_TRUE(SameNetworks(agent, twin));
  EXPECT_TRUE(nn::BitEqual(agent.recruited_actor(), before.recruited_actor()));
  EXPECT_FALSE(nn::BitEqual(agent.critic(), before.critic()));
  EXPECT_FALSE(nn::BitEqual(agent.gradient_actor(), before.gradient_actor()));
  EXPECT_EQ(agent.train_steps(), 1u);
}

TEST(TrainStep, StaysFinite) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 26);
  Rng rng(22);
  ReplayBuffer buf(kObs, kAct, 1000);
  FillBuffer(buf, 500, rng);
  for (int i = 0; i < 300; ++i) agent.TrainStep(buf, rng);
  EXPECT_TRUE(agent.critic().AllFinite());
  EXPECT_TRUE(agent.gradient_actor().AllFinite());
  EXPECT_TRUE(agent.target_critic().AllFinite());
}

TEST(Checkpoint, RoundTripContinuesIdentically) {
  DualPolicyAgent agent(kObs, kAct, SmallConfig(), 27);
  Rng rng(23);
  ReplayBuffer buf(kObs, kAct, 200);
  FillBuffer(buf, 100, rng);
  for (int i = 0; i < 5; ++i) agent.TrainStep(buf, rng);
  agent.ExploreAction(nn::Vector::Zero(kObs));
  std::stringstream ss;
  agent.SaveCheckpoint(ss);
  DualPolicyAgent loaded = DualPolicyAgent::LoadCheckpoint(ss);
  EXPECT_TRUE(SameNetworks(agent, loaded));
  EXPECT_EQ(loaded.train_steps(), agent.train_steps());
  Rng r1(4);
  Rng r2(4);
  agent.TrainStep(buf, r1);
  loaded.TrainStep(buf, r2);
  EXPECT_TRUE(SameNetworks(agent, loaded));
  const nn::Vector s = nn::Vector::Constant(kObs, 0.2);
  EXPECT_TRUE(agent.ExploreAction(s) == loaded.ExploreAction(s));
}

}  // namespace
}  // namespace rim::rl
