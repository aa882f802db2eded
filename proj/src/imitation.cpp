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

#include "rim/imitation.hpp"

#include <cmath>
#include <string>

#include "rim/errors.hpp"

namespace rim::il {

void ImitationConfig::Validate() const {
  Require(iterations >= 1, "imitation needs at least one iteration");
  Require(batch_size >= 1, "imitation batch size must be positive");
  Require(learning_rate > 0.0, "imitation learning rate must be positive");
}

double MeanL1(const nn::MlpParams& policy, const Expert& expert, const nn::Matrix& states) {
  Require(states.cols() >= 1, "need at least one state");
  const nn::Matrix diff = nn::Predict(policy, states) - expert(states);
  return diff.cwiseAbs().sum() / static_cast<double>(states.cols());
}

ImitationResult Imitate(const nn::MlpParams& worst, const Expert& expert,
                        const ReplayBuffer& buffer, const ImitationConfig& cfg, Rng& rng) {
  cfg.Validate();
  Require(worst.input_dim() == buffer.obs_dim() && worst.output_dim() == buffer.act_dim(),
          "trainee is not actor-shaped for this buffer");
  ImitationResult result{worst, false, {}};
  if (buffer.size() <= cfg.warmup) {
    result.skipped = true;
    return result;
  }
  nn::AdamState opt = nn::AdamState::For(result.trained, cfg.learning_rate);
  result.losses.reserve(cfg.iterations);
  const double k = static_cast<double>(cfg.batch_size);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const nn::Matrix states = buffer.SampleStates(cfg.batch_size, rng);
    const nn::Matrix labels = expert(states);
    const auto fwd = nn::MlpForward(result.trained, states);
    const nn::Matrix diff = fwd.output - labels;
    const double loss = diff.cwiseAbs().sum() / k;
    if (!std::isfinite(loss)) {
      throw NumericalError("imitation loss is not finite at iteration " + std::to_string(it));
    }
    result.losses.push_back(loss);
    // d|x|/dx = sign(x); zero where the trainee already matches.
    const nn::Matrix grad = diff.unaryExpr([k](double d) {
      return d > 0.0 ? 1.0 / k : (d < 0.0 ? -1.0 / k : 0.0);
    });
    const auto bwd = nn::MlpBackward(result.trained, fwd.cache, grad);
    nn::AdamStep(opt, result.trained, bwd.param_grads);
  }
  return result;
}

Expert AgentExpert(const rl::DualPolicyAgent& agent) {
  return [&agent](const nn::Matrix& states) { return agent.SelectActions(states); };
}

ImitationResult Imitate(const nn::MlpParams& worst, const rl::DualPolicyAgent& agent,
                        const ReplayBuffer& buffer, const ImitationConfig& cfg, Rng& rng) {
  return Imitate(worst, AgentExpert(agent), buffer, cfg, rng);
}

std::size_t PickWorst(const evo::Population& pop) {
  Require(!pop.members.empty(), "population is empty");
  std::vector<double> fitness;
  fitness.reserve(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    Require(pop.members[i].fitness.has_value(),
            "member " + std::to_string(i) + " has no fitness; evaluate first");
    fitness.push_back(*pop.members[i].fitness);
  }
  return PickWorst(fitness, std::vector<bool>(fitness.size(), false));
}

std::size_t PickWorst(std::span<const double> fitness, const std::vector<bool>& excluded) {
  Require(!fitness.empty(), "no fitness values");
  Require(excluded.size() == fitness.size(), "exclusion mask has wrong length");
  bool all_excluded = true;
  for (bool e : excluded) all_excluded = all_excluded && e;
  std::size_t worst = fitness.size();
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    if (excluded[i] && !all_excluded) continue;
    if (worst == fitness.size() || fitness[i] < fitness[worst]) worst = i;
  }
  return worst;
}

}  // namespace rim::il
