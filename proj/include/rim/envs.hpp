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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rim/neural.hpp"
#include "rim/replay.hpp"
#include "rim/rng.hpp"

// Small deterministic continuous-control tasks. All dynamics use explicit
// Euler integration with dt = 0.05 and clip actions to [-1, 1] first.
namespace rim::envs {

struct EnvSpec {
  std::string name;
  std::size_t obs_dim = 1;
  std::size_t act_dim = 1;
  std::size_t max_episode_steps = 1;
};

struct StepResult {
  nn::Vector observation;
  double reward = 0.0;
  bool done = false;         // episode over (goal reached or step budget spent)
  bool reached_goal = false;  // true terminal state; time-outs leave this false
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  // Re-initializes from seed and returns the first observation.
  virtual nn::Vector Reset(std::uint64_t seed) = 0;
  // Throws ContractViolation on a wrong action length or after done.
  virtual StepResult Step(const nn::Vector& action) = 0;
  virtual std::unique_ptr<Environment> Clone() const = 0;

  // Largest |reward| a single step can produce.
  virtual double RewardBound() const = 0;

  std::size_t elapsed_steps() const { return elapsed_; }
  bool episode_over() const { return done_; }

 protected:
  nn::Vector ClipAction(const nn::Vector& action);
  void BeginEpisode() {
    elapsed_ = 0;
    done_ = false;
  }
  // Advances the step counter; returns true once the budget is exhausted.
  bool Tick();
  void MarkDone() { done_ = true; }

 private:
  std::size_t elapsed_ = 0;
  bool done_ = true;
};

// Double integrator in the box [-1, 1]^n. Observation is (position - goal,
// velocity). Dense variant: reward -|pos - goal| - 0.01 |a|^2, no early
// termination. Sparse variant: reward 1 and done once within 0.05 of the goal,
// 0 elsewhere.
class PointMass : public Environment {
 public:
  static constexpr double kDt = 0.05;
  static constexpr double kAccel = 4.0;
  static constexpr double kMaxSpeed = 2.0;
  static constexpr double kWall = 1.0;
  static constexpr double kActionCost = 0.01;
  static constexpr double kGoalRadius = 0.05;
  static constexpr std::size_t kEpisodeSteps = 100;

  PointMass(std::size_t dims, bool sparse, nn::Vector goal, double start_half_width);

  const EnvSpec& spec() const override { return spec_; }
  nn::Vector Reset(std::uint64_t seed) override;
  StepResult Step(const nn::Vector& action) override;
  std::unique_ptr<Environment> Clone() const override;
  double RewardBound() const override;

  // Places the mass directly and starts a fresh episode from there.
  nn::Vector SetState(const nn::Vector& position, const nn::Vector& velocity);

  const nn::Vector& position() const { return position_; }
  const nn::Vector& velocity() const { return velocity_; }
  const nn::Vector& goal() const { return goal_; }

 private:
  nn::Vector Observe() const;

  EnvSpec spec_;
  bool sparse_;
  nn::Vector goal_;
  double start_half_width_;
  nn::Vector position_;
  nn::Vector velocity_;
};

// Torque-limited pendulum swing-up. Observation (cos th, sin th, th_dot),
// reward -(th^2 + 0.1 th_dot^2 + 0.001 u^2) with th wrapped to [-pi, pi).
class Pendulum : public Environment {
 public:
  static constexpr double kDt = 0.05;
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr std::size_t kEpisodeSteps = 200;

  Pendulum();

  const EnvSpec& spec() const override { return spec_; }
  nn::Vector Reset(std::uint64_t seed) override;
  StepResult Step(const nn::Vector& action) override;
  std::unique_ptr<Environment> Clone() const override;
  double RewardBound() const override;

  double angle() const { return theta_; }
  double angular_velocity() const { return theta_dot_; }

 private:
  nn::Vector Observe() const;

  EnvSpec spec_;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
};

// "PointMass1D", "PointMass2D", "SparsePointMass2D" or "Pendulum".
std::unique_ptr<Environment> MakeEnv(const std::string& name);
std::vector<std::string> EnvNames();

// Maps (observation, with_noise) to an action.
using ActionFn = std::function<nn::Vector(const nn::Vector&, bool)>;
using StepObserver = std::function<void(const Transition&)>;

struct RolloutResult {
  double episode_return = 0.0;
  std::size_t steps = 0;
  bool reached_goal = false;
};

// Runs one full episode. Every transition is pushed to buffer when given and
// passed to on_step afterwards. Transition::done records true terminals only.
RolloutResult Rollout(Environment& env, const ActionFn& policy, std::uint64_t seed,
                      bool with_noise, ReplayBuffer* buffer = nullptr,
                      const StepObserver& on_step = {});

// Noise-free deterministic policy backed by a network.
ActionFn NetworkPolicy(const nn::MlpParams& params);

// Saturated PD controller for PointMass observations; the scripted baseline.
nn::Vector PointMassController(const nn::Vector& observation);

}  // namespace rim::envs
