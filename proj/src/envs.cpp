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

#include "rim/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rim/errors.hpp"

namespace rim::envs {
namespace {

constexpr double kControllerKp = 16.0;
constexpr double kControllerKd = 4.0;

double WrapAngle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(theta + std::numbers::pi, two_pi);
  if (wrapped < 0.0) wrapped += two_pi;
  return wrapped - std::numbers::pi;
}

}  // namespace

nn::Vector Environment::ClipAction(const nn::Vector& action) {
  const EnvSpec& s = spec();
  Require(static_cast<std::size_t>(action.size()) == s.act_dim,
          "action length " + std::to_string(action.size()) + " does not match act_dim " +
              std::to_string(s.act_dim) + " of " + s.name);
  Require(!done_, "step called on " + s.name + " after the episode ended; call Reset");
  return action.cwiseMax(-1.0).cwiseMin(1.0);
}

bool Environment::Tick() {
  ++elapsed_;
  return elapsed_ >= spec().max_episode_steps;
}

PointMass::PointMass(std::size_t dims, bool sparse, nn::Vector goal, double start_half_width)
    : sparse_(sparse),
      goal_(std::move(goal)),
      start_half_width_(start_half_width),
      position_(nn::Vector::Zero(static_cast<Eigen::Index>(dims))),
      velocity_(nn::Vector::Zero(static_cast<Eigen::Index>(dims))) {
  Require(dims >= 1, "PointMass needs at least one dimension");
  Require(static_cast<std::size_t>(goal_.size()) == dims, "goal dimension mismatch");
  spec_.name = (sparse ? "SparsePointMass" : "PointMass") + std::to_string(dims) + "D";
  spec_.obs_dim = 2 * dims;
  spec_.act_dim = dims;
  spec_.max_episode_steps = kEpisodeSteps;
}

nn::Vector PointMass::Observe() const {
  nn::Vector obs(2 * position_.size());
  obs << position_ - goal_, velocity_;
  return obs;
}

nn::Vector PointMass::Reset(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> start(-start_half_width_, start_half_width_);
  for (Eigen::Index i = 0; i < position_.size(); ++i) position_(i) = start(rng);
  velocity_.setZero();
  BeginEpisode();
  return Observe();
}

nn::Vector PointMass::SetState(const nn::Vector& position, const nn::Vector& velocity) {
  Require(position.size() == position_.size() && velocity.size() == velocity_.size(),
          "state dimension mismatch");
  position_ = position.cwiseMax(-kWall).cwiseMin(kWall);
  velocity_ = velocity.cwiseMax(-kMaxSpeed).cwiseMin(kMaxSpeed);
  BeginEpisode();
  return Observe();
}

StepResult PointMass::Step(const nn::Vector& action) {
  const nn::Vector a = ClipAction(action);
  // Explicit Euler: position advances with the pre-step velocity.
  nn::Vector next_position = position_ + kDt * velocity_;
  nn::Vector next_velocity = (velocity_ + kDt * kAccel * a).cwiseMax(-kMaxSpeed).cwiseMin(kMaxSpeed);
  for (Eigen::Index i = 0; i < next_position.size(); ++i) {
    if (next_position(i) > kWall || next_position(i) < -kWall) {
      next_position(i) = std::clamp(next_position(i), -kWall, kWall);
      next_velocity(i) = 0.0;
    }
  }
  position_ = next_position;
  velocity_ = next_velocity;

  StepResult result;
  const double distance = (position_ - goal_).norm();
  if (sparse_) {
    result.reached_goal = distance <= kGoalRadius;
    result.reward = result.reached_goal ? 1.0 : 0.0;
  } else {
    result.reward = -distance - kActionCost * a.squaredNorm();
  }
  const bool out_of_time = Tick();
  result.done = result.reached_goal || out_of_time;
  if (result.done) MarkDone();
  result.observation = Observe();
  return result;
}

std::unique_ptr<Environment> PointMass::Clone() const {
  return std::make_unique<PointMass>(*this);
}

double PointMass::RewardBound() const {
  if (sparse_) return 1.0;
  const auto n = static_cast<double>(position_.size());
  return 2.0 * kWall * std::sqrt(n) + kActionCost * n;
}

Pendulum::Pendulum() {
  spec_.name = "Pendulum";
  spec_.obs_dim = 3;
  spec_.act_dim = 1;
  spec_.max_episode_steps = kEpisodeSteps;
}

nn::Vector Pendulum::Observe() const {
  nn::Vector obs(3);
  obs << std::cos(theta_), std::sin(theta_), theta_dot_;
  return obs;
}

nn::Vector Pendulum::Reset(std::uint64_t seed) {
  Rng rng(seed);
  theta_ = std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng);
  theta_dot_ = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  BeginEpisode();
  return Observe();
}

StepResult Pendulum::Step(const nn::Vector& action) {
  const double u = kMaxTorque * ClipAction(action)(0);
  const double th = WrapAngle(theta_);
  StepResult result;
  result.reward = -(th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);
  const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) +
                       3.0 / (kMass * kLength * kLength) * u;
  theta_ = theta_ + kDt * theta_dot_;
  theta_dot_ = std::clamp(theta_dot_ + kDt * accel, -kMaxSpeed, kMaxSpeed);
  result.done = Tick();
  if (result.done) MarkDone();
  result.observation = Observe();
  return result;
}

std::unique_ptr<Environment> Pendulum::Clone() const { return std::make_unique<Pendulum>(*this); }

double Pendulum::RewardBound() const {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return pi2 + 0.1 * kMaxSpeed * kMaxSpeed + 0.001 * kMaxTorque * kMaxTorque;
}

std::unique_ptr<Environment> MakeEnv(const std::string& name) {
  if (name == "PointMass1D") {
    return std::make_unique<PointMass>(1, false, nn::Vector::Zero(1), 0.5);
  }
  if (name == "PointMass2D") {
    return std::make_unique<PointMass>(2, false, nn::Vector::Zero(2), 0.5);
  }
  if (name == "SparsePointMass2D") {
    return std::make_unique<PointMass>(2, true, nn::Vector::Constant(2, 0.5), 1.0);
  }
  if (name == "Pendulum") return std::make_unique<Pendulum>();
  throw ConfigError("unknown environment '" + name + "'");
}

std::vector<std::string> EnvNames() {
  return {"PointMass1D", "PointMass2D", "SparsePointMass2D", "Pendulum"};
}

RolloutResult Rollout(Environment& env, const ActionFn& policy, std::uint64_t seed,
                      bool with_noise, ReplayBuffer* buffer, const StepObserver& on_step) {
  RolloutResult result;
  nn::Vector obs = env.Reset(seed);
  const std::size_t act_dim = env.spec().act_dim;
  bool done = false;
  while (!done) {
    nn::Vector action = policy(obs, with_noise);
    Require(static_cast<std::size_t>(action.size()) == act_dim,
            "policy output dim does not match env act_dim");
    action = action.cwiseMax(-1.0).cwiseMin(1.0);
    StepResult step = env.Step(action);
    result.episode_return += step.reward;
    ++result.steps;
    result.reached_goal = result.reached_goal || step.reached_goal;
    done = step.done;
    if (buffer != nullptr || on_step) {
      Transition t{obs, action, step.reward, step.observation, step.reached_goal};
      if (buffer != nullptr) buffer->Push(t);
      if (on_step) on_step(t);
    }
    obs = std::move(step.observation);
  }
  return result;
}

ActionFn NetworkPolicy(const nn::MlpParams& params) {
  return [&params](const nn::Vector& obs, bool) { return nn::Predict(params, obs); };
}

nn::Vector PointMassController(const nn::Vector& observation) {
  const Eigen::Index dims = observation.size() / 2;
  const nn::Vector error = observation.head(dims);
  const nn::Vector velocity = observation.tail(dims);
  return (-kControllerKp * error - kControllerKd * velocity).cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace rim::envs
