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
#include <ostream>
#include <vector>

#include "rim/neural.hpp"
#include "rim/rng.hpp"

namespace rim {

struct Transition {
  nn::Vector state;
  nn::Vector action;
  double reward = 0.0;
  nn::Vector next_state;
  bool done = false;
};

// Column-wise batch view of sampled transitions (one sample per column).
struct TransitionBatch {
  nn::Matrix states;       // (obs_dim x n)
  nn::Matrix actions;      // (act_dim x n)
  nn::Vector rewards;      // (n)
  nn::Matrix next_states;  // (obs_dim x n)
  std::vector<bool> dones;

  std::size_t size() const { return static_cast<std::size_t>(rewards.size()); }
};

// Bounded FIFO ring of transitions. Storage grows on demand up to capacity.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t obs_dim, std::size_t act_dim, std::size_t capacity = 1'000'000);

  void Push(const Transition& t);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::uint64_t insertions() const { return insertions_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }

  // i-th stored transition in insertion order: 0 is the oldest still held.
  Transition At(std::size_t i) const;

  // Uniform with replacement. Throws ContractViolation when empty.
  std::vector<Transition> Sample(std::size_t n, Rng& rng) const;
  TransitionBatch SampleBatch(std::size_t n, Rng& rng) const;
  nn::Matrix SampleStates(std::size_t n, Rng& rng) const;

  void Save(std::ostream& out) const;
  static ReplayBuffer Load(std::istream& in);

 private:
  std::vector<std::size_t> DrawSlots(std::size_t n, Rng& rng) const;
  std::size_t SlotOf(std::size_t i) const;

  std::size_t obs_dim_;
  std::size_t act_dim_;
  std::size_t capacity_;
  std::uint64_t insertions_ = 0;
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_states_;
  std::vector<std::uint8_t> dones_;
};

}  // namespace rim
