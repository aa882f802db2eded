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

#include "rim/agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "rim/binary_io.hpp"
#include "rim/errors.hpp"

namespace rim::rl {
namespace {

constexpr char kAgentMagic[5] = "RIMA";
constexpr std::uint32_t kAgentVersion = 1;

}  // namespace

void AgentConfig::Validate() const {
  Require(!hidden.empty(), "agent needs at least one hidden layer");
  Require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  Require(tau0 > 0.0 && tau0 <= 1.0, "tau0 must lie in (0, 1]");
  Require(tau1 > 0.0 && tau1 <= 1.0, "tau1 must lie in (0, 1]");
  Require(actor_lr > 0.0 && critic_lr > 0.0, "learning rates must be positive");
  Require(noise_sigma >= 0.0, "noise sigma must be non-negative");
  Require(batch_size >= 1, "batch size must be positive");
}

std::vector<std::size_t> ActorDims(std::size_t obs_dim, std::size_t act_dim,
                                   const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> dims{obs_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(act_dim);
  return dims;
}

std::vector<std::size_t> CriticDims(std::size_t obs_dim, std::size_t act_dim,
                                    const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> dims{obs_dim + act_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return dims;
}

DualPolicyAgent::DualPolicyAgent(std::size_t obs_dim, std::size_t act_dim, AgentConfig cfg,
                                 std::uint64_t seed)
    : cfg_(std::move(cfg)), obs_dim_(obs_dim), act_dim_(act_dim) {
  cfg_.Validate();
  Rng init = ChildStream(seed, "agent-init");
  const auto actor_dims = ActorDims(obs_dim, act_dim, cfg_.hidden);
  pg_actor_ = nn::MlpParams::RandomInit(actor_dims, nn::Activation::kTanh, init);
  ea_actor_ = nn::MlpParams::RandomInit(actor_dims, nn::Activation::kTanh, init);
  critic_ = nn::MlpParams::RandomInit(CriticDims(obs_dim, act_dim, cfg_.hidden),
                                      nn::Activation::kIdentity, init);
  target_pg_actor_ = pg_actor_;
  target_ea_actor_ = ea_actor_;
  target_critic_ = critic_;
  actor_opt_ = nn::AdamState::For(pg_actor_, cfg_.actor_lr);
  critic_opt_ = nn::AdamState::For(critic_, cfg_.critic_lr);
  noise_rng_ = ChildStream(seed, "agent-noise");
}

nn::Matrix DualPolicyAgent::CriticInput(const nn::Matrix& states,
                                        const nn::Matrix& actions) const {
  nn::Matrix input(states.rows() + actions.rows(), states.cols());
  input << states, actions;
  return input;
}

double DualPolicyAgent::QValue(const nn::Vector& state, const nn::Vector& action) const {
  nn::Vector input(state.size() + action.size());
  input << state, action;
  return nn::Predict(critic_, input)(0);
}

ActionChoice DualPolicyAgent::Choose(const nn::Vector& state) const {
  Require(static_cast<std::size_t>(state.size()) == obs_dim_, "state has wrong dimension");
  ActionChoice choice;
  choice.action = nn::Predict(pg_actor_, state);
  if (cfg_.behavior == BehaviorPolicy::kGradientOnly) {
    choice.q_gradient = QValue(state, choice.action);
    choice.q_recruited = choice.q_gradient;
    return choice;
  }
  nn::Vector recruited = nn::Predict(ea_actor_, state);
  choice.q_gradient = QValue(state, choice.action);
  choice.q_recruited = QValue(state, recruited);
  if (!(choice.q_gradient >= choice.q_recruited)) {
    choice.action = std::move(recruited);
    choice.from_gradient_actor = false;
  }
  return choice;
}

nn::Matrix DualPolicyAgent::SelectActions(const nn::Matrix& states) const {
  nn::Matrix a_pg = nn::Predict(pg_actor_, states);
  if (cfg_.behavior == BehaviorPolicy::kGradientOnly) return a_pg;
  const nn::Matrix a_ea = nn::Predict(ea_actor_, states);
  const nn::Matrix q_pg = nn::Predict(critic_, CriticInput(states, a_pg));
  const nn::Matrix q_ea = nn::Predict(critic_, CriticInput(states, a_ea));
  for (Eigen::Index j = 0; j < states.cols(); ++j) {
    if (!(q_pg(0, j) >= q_ea(0, j))) a_pg.col(j) = a_ea.col(j);
  }
  return a_pg;
}

nn::Vector DualPolicyAgent::ExploreAction(const nn::Vector& state) {
  nn::Vector action = SelectAction(state);
  if (cfg_.noise_sigma > 0.0) {
    for (Eigen::Index i = 0; i < action.size(); ++i) {
      action(i) += Gaussian(noise_rng_, cfg_.noise_sigma);
    }
  }
  return action.cwiseMax(-1.0).cwiseMin(1.0);
}

void DualPolicyAgent::Recruit(const nn::MlpParams& champion) {
  Require(champion.SameShape(ea_actor_), "champion is not shaped like the agent's actors");
  ea_actor_ = champion;
  if (cfg_.recruitment == RecruitmentMode::kHard) target_ea_actor_ = champion;
}

TargetCandidates DualPolicyAgent::ComputeTargetCandidates(const TransitionBatch& batch) const {
  TargetCandidates out;
  const nn::Matrix& next = batch.next_states;
  if (cfg_.target != TargetPolicy::kRecruitedOnly) {
    const nn::Matrix a = nn::Predict(target_pg_actor_, next);
    out.q_gradient = nn::Predict(target_critic_, CriticInput(next, a)).row(0).transpose();
  }
  if (cfg_.target != TargetPolicy::kGradientOnly) {
    const nn::Matrix a = nn::Predict(target_ea_actor_, next);
    out.q_recruited = nn::Predict(target_critic_, CriticInput(next, a)).row(0).transpose();
  }
  return out;
}

nn::Vector DualPolicyAgent::ComputeTarget(const TransitionBatch& batch) const {
  Require(batch.size() >= 1, "target computation needs a non-empty batch");
  const TargetCandidates c = ComputeTargetCandidates(batch);
  nn::Vector y(batch.rewards.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double bootstrap = 0.0;
    switch (cfg_.target) {
      case TargetPolicy::kDual:
        bootstrap = std::max(c.q_gradient(i), c.q_recruited(i));
        break;
      case TargetPolicy::kGradientOnly:
        bootstrap = c.q_gradient(i);
        break;
      case TargetPolicy::kRecruitedOnly:
        bootstrap = c.q_recruited(i);
        break;
    }
    y(i) = batch.rewards(i);
    if (!batch.dones[static_cast<std::size_t>(i)]) y(i) += cfg_.gamma * bootstrap;
  }
  return y;
}

LossGradient DualPolicyAgent::CriticGradient(const TransitionBatch& batch) const {
  Require(batch.size() >= 1, "critic update needs a non-empty batch");
  const nn::Vector y = ComputeTarget(batch);
  const auto fwd = nn::MlpForward(critic_, CriticInput(batch.states, batch.actions));
  const nn::Matrix diff = fwd.output - y.transpose();
  const double n = static_cast<double>(batch.size());
  LossGradient result;
  result.value = diff.squaredNorm() / n;
  if (!std::isfinite(result.value)) throw NumericalError("critic loss is not finite");
  result.grads = nn::MlpBackward(critic_, fwd.cache, (2.0 / n) * diff).param_grads;
  return result;
}

LossGradient DualPolicyAgent::ActorGradient(const TransitionBatch& batch) const {
  Require(batch.size() >= 1, "actor update needs a non-empty batch");
  const auto actor_fwd = nn::MlpForward(pg_actor_, batch.states);
  const auto critic_fwd = nn::MlpForward(critic_, CriticInput(batch.states, actor_fwd.output));
  const double n = static_cast<double>(batch.size());
  LossGradient result;
  result.value = critic_fwd.output.sum() / n;
  if (!std::isfinite(result.value)) throw NumericalError("actor objective is not finite");
  // Descend L = -mean Q(s, pi(s)); the critic is only differentiated, not stepped.
  const nn::Matrix loss_grad = nn::Matrix::Constant(1, critic_fwd.output.cols(), -1.0 / n);
  const auto critic_bwd = nn::MlpBackward(critic_, critic_fwd.cache, loss_grad);
  const nn::Matrix action_grad =
      critic_bwd.input_grad.bottomRows(static_cast<Eigen::Index>(act_dim_));
  result.grads = nn::MlpBackward(pg_actor_, actor_fwd.cache, action_grad).param_grads;
  return result;
}

double DualPolicyAgent::UpdateCritic(const TransitionBatch& batch) {
  const LossGradient g = CriticGradient(batch);
  nn::AdamStep(critic_opt_, critic_, g.grads);
  return g.value;
}

double DualPolicyAgent::UpdateActor(const TransitionBatch& batch) {
  const LossGradient g = ActorGradient(batch);
  nn::AdamStep(actor_opt_, pg_actor_, g.grads);
  return g.value;
}

void DualPolicyAgent::UpdateTargets() {
  if (cfg_.recruitment == RecruitmentMode::kSoft) {
    nn::SoftUpdate(target_ea_actor_, ea_actor_, cfg_.tau0);
  }
  nn::SoftUpdate(target_critic_, critic_, cfg_.tau1);
  nn::SoftUpdate(target_pg_actor_, pg_actor_, cfg_.tau1);
}

std::optional<TrainStats> DualPolicyAgent::TrainStep(const ReplayBuffer& buffer, Rng& sampler) {
  if (buffer.size() <= cfg_.warmup) return std::nullopt;
  const TransitionBatch batch = buffer.SampleBatch(cfg_.batch_size, sampler);
  TrainStats stats;
  stats.critic_loss = UpdateCritic(batch);
  stats.actor_objective = UpdateActor(batch);
  UpdateTargets();
  ++train_steps_;
  return stats;
}

envs::ActionFn DualPolicyAgent::AsPolicy() {
  return [this](const nn::Vector& obs, bool with_noise) {
    return with_noise ? ExploreAction(obs) : SelectAction(obs);
  };
}

void DualPolicyAgent::SaveCheckpoint(std::ostream& out) const {
  io::WriteHeader(out, kAgentMagic, kAgentVersion);
  io::Write<std::uint64_t>(out, obs_dim_);
  io::Write<std::uint64_t>(out, act_dim_);
  io::Write<std::uint32_t>(out, static_cast<std::uint32_t>(cfg_.hidden.size()));
  for (std::size_t h : cfg_.hidden) io::Write<std::uint64_t>(out, h);
  for (double v : {cfg_.gamma, cfg_.tau0, cfg_.tau1, cfg_.actor_lr, cfg_.critic_lr,
                   cfg_.noise_sigma}) {
    io::Write<double>(out, v);
  }
  io::Write<std::uint64_t>(out, cfg_.batch_size);
  io::Write<std::uint64_t>(out, cfg_.warmup);
  io::Write<std::uint8_t>(out, static_cast<std::uint8_t>(cfg_.recruitment));
  io::Write<std::uint8_t>(out, static_cast<std::uint8_t>(cfg_.behavior));
  io::Write<std::uint8_t>(out, static_cast<std::uint8_t>(cfg_.target));
  io::Write<std::uint64_t>(out, train_steps_);
  for (const auto* net : {&pg_actor_, &ea_actor_, &critic_, &target_pg_actor_,
                          &target_ea_actor_, &target_critic_}) {
    nn::SaveParams(out, *net);
  }
  nn::SaveAdam(out, actor_opt_);
  nn::SaveAdam(out, critic_opt_);
  std::ostringstream rng_state;
  rng_state << noise_rng_;
  const std::string text = rng_state.str();
  io::Write<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

DualPolicyAgent DualPolicyAgent::LoadCheckpoint(std::istream& in) {
  const std::uint32_t version = io::ReadHeader(in, kAgentMagic);
  Require(version == kAgentVersion, "unsupported agent checkpoint version");
  DualPolicyAgent agent;
  agent.obs_dim_ = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  agent.act_dim_ = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  AgentConfig& cfg = agent.cfg_;
  cfg.hidden.resize(io::Read<std::uint32_t>(in));
  for (auto& h : cfg.hidden) h = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  for (double* v : {&cfg.gamma, &cfg.tau0, &cfg.tau1, &cfg.actor_lr, &cfg.critic_lr,
                    &cfg.noise_sigma}) {
    *v = io::Read<double>(in);
  }
  cfg.batch_size = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  cfg.warmup = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  cfg.recruitment = static_cast<RecruitmentMode>(io::Read<std::uint8_t>(in));
  cfg.behavior = static_cast<BehaviorPolicy>(io::Read<std::uint8_t>(in));
  cfg.target = static_cast<TargetPolicy>(io::Read<std::uint8_t>(in));
  cfg.Validate();
  agent.train_steps_ = io::Read<std::uint64_t>(in);
  for (auto* net : {&agent.pg_actor_, &agent.ea_actor_, &agent.critic_, &agent.target_pg_actor_,
                    &agent.target_ea_actor_, &agent.target_critic_}) {
    *net = nn::LoadParams(in);
  }
  agent.actor_opt_ = nn::LoadAdam(in);
  agent.critic_opt_ = nn::LoadAdam(in);
  const auto len = io::Read<std::uint64_t>(in);
  std::string text(static_cast<std::size_t>(len), '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ContractViolation("truncated agent checkpoint");
  std::istringstream rng_state(text);
  rng_state >> agent.noise_rng_;
  return agent;
}

}  // namespace rim::rl
