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

#include "rim/replay.hpp"

#include <algorithm>
#include <string>

#include "rim/binary_io.hpp"
#include "rim/errors.hpp"

namespace rim {
namespace {

constexpr char kBufferMagic[5] = "RIMB";
constexpr std::uint32_t kBufferVersion = 1;

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t obs_dim, std::size_t act_dim, std::size_t capacity)
    : obs_dim_(obs_dim), act_dim_(act_dim), capacity_(capacity) {
  Require(obs_dim > 0 && act_dim > 0, "replay buffer dims must be positive");
  Require(capacity > 0, "replay buffer capacity must be positive");
}

std::size_t ReplayBuffer::size() const {
  return static_cast<std::size_t>(std::min<std::uint64_t>(insertions_, capacity_));
}

std::size_t ReplayBuffer::SlotOf(std::size_t i) const {
  if (insertions_ <= capacity_) return i;
  return static_cast<std::size_t>((insertions_ + i) % capacity_);
}

void ReplayBuffer::Push(const Transition& t) {
  Require(static_cast<std::size_t>(t.state.size()) == obs_dim_ &&
              static_cast<std::size_t>(t.next_state.size()) == obs_dim_,
          "transition state dim " + std::to_string(t.state.size()) +
              " does not match buffer obs_dim " + std::to_string(obs_dim_));
  Require(static_cast<std::size_t>(t.action.size()) == act_dim_,
          "transition action dim does not match buffer act_dim");
  const std::size_t slot = static_cast<std::size_t>(insertions_ % capacity_);
  if (slot == rewards_.size()) {
    states_.resize(states_.size() + obs_dim_);
    actions_.resize(actions_.size() + act_dim_);
    next_states_.resize(next_states_.size() + obs_dim_);
    rewards_.push_back(0.0);
    dones_.push_back(0);
  }
  std::copy_n(t.state.data(), obs_dim_, states_.begin() + slot * obs_dim_);
  std::copy_n(t.action.data(), act_dim_, actions_.begin() + slot * act_dim_);
  std::copy_n(t.next_state.data(), obs_dim_, next_states_.begin() + slot * obs_dim_);
  rewards_[slot] = t.reward;
  dones_[slot] = t.done ? 1 : 0;
  ++insertions_;
}

Transition ReplayBuffer::At(std::size_t i) const {
  Require(i < size(), "replay index out of range");
  const std::size_t slot = SlotOf(i);
  Transition t;
  t.state = Eigen::Map<const nn::Vector>(states_.data() + slot * obs_dim_, obs_dim_);
  t.action = Eigen::Map<const nn::Vector>(actions_.data() + slot * act_dim_, act_dim_);
  t.next_state = Eigen::Map<const nn::Vector>(next_states_.data() + slot * obs_dim_, obs_dim_);
  t.reward = rewards_[slot];
  t.done = dones_[slot] != 0;
  return t;
}

std::vector<std::size_t> ReplayBuffer::DrawSlots(std::size_t n, Rng& rng) const {
  if (size() == 0) throw ContractViolation("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size() - 1);
  std::vector<std::size_t> slots(n);
  // Every physical slot below size() holds a live transition, so slots can be
  // drawn directly without translating through insertion order.
  for (auto& s : slots) s = pick(rng);
  return slots;
}

std::vector<Transition> ReplayBuffer::Sample(std::size_t n, Rng& rng) const {
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t slot : DrawSlots(n, rng)) {
    Transition t;
    t.state = Eigen::Map<const nn::Vector>(states_.data() + slot * obs_dim_, obs_dim_);
    t.action = Eigen::Map<const nn::Vector>(actions_.data() + slot * act_dim_, act_dim_);
    t.next_state =
        Eigen::Map<const nn::Vector>(next_states_.data() + slot * obs_dim_, obs_dim_);
    t.reward = rewards_[slot];
    t.done = dones_[slot] != 0;
    out.push_back(std::move(t));
  }
  return out;
}

TransitionBatch ReplayBuffer::SampleBatch(std::size_t n, Rng& rng) const {
  const auto slots = DrawSlots(n, rng);
  const auto cols = static_cast<Eigen::Index>(n);
  TransitionBatch batch;
  batch.states.resize(static_cast<Eigen::Index>(obs_dim_), cols);
  batch.actions.resize(static_cast<Eigen::Index>(act_dim_), cols);
  batch.next_states.resize(static_cast<Eigen::Index>(obs_dim_), cols);
  batch.rewards.resize(cols);
  batch.dones.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t slot = slots[j];
    const auto col = static_cast<Eigen::Index>(j);
    batch.states.col(col) = Eigen::Map<const nn::Vector>(states_.data() + slot * obs_dim_, obs_dim_);
    batch.actions.col(col) =
        Eigen::Map<const nn::Vector>(actions_.data() + slot * act_dim_, act_dim_);
    batch.next_states.col(col) =
        Eigen::Map<const nn::Vector>(next_states_.data() + slot * obs_dim_, obs_dim_);
    batch.rewards(col) = rewards_[slot];
    batch.dones[j] = dones_[slot] != 0;
  }
  return batch;
}

nn::Matrix ReplayBuffer::SampleStates(std::size_t n, Rng& rng) const {
  const auto slots = DrawSlots(n, rng);
  nn::Matrix states(static_cast<Eigen::Index>(obs_dim_), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    states.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const nn::Vector>(states_.data() + slots[j] * obs_dim_, obs_dim_);
  }
  return states;
}

void ReplayBuffer::Save(std::ostream& out) const {
  io::WriteHeader(out, kBufferMagic, kBufferVersion);
  io::Write<std::uint64_t>(out, obs_dim_);
  io::Write<std::uint64_t>(out, act_dim_);
  io::Write<std::uint64_t>(out, capacity_);
  io::Write<std::uint64_t>(out, insertions_);
  // Transitions oldest first, so a reload reproduces the eviction order.
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t slot = SlotOf(i);
    io::WriteDoubles(out, states_.data() + slot * obs_dim_, obs_dim_);
    io::WriteDoubles(out, actions_.data() + slot * act_dim_, act_dim_);
    io::Write<double>(out, rewards_[slot]);
    io::WriteDoubles(out, next_states_.data() + slot * obs_dim_, obs_dim_);
    io::Write<std::uint8_t>(out, dones_[slot]);
  }
}

ReplayBuffer ReplayBuffer::Load(std::istream& in) {
  const std::uint32_t version = io::ReadHeader(in, kBufferMagic);
  Require(version == kBufferVersion, "unsupported replay buffer format version");
  const auto obs_dim = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  const auto act_dim = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  const auto capacity = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  const auto insertions = io::Read<std::uint64_t>(in);
  ReplayBuffer buffer(obs_dim, act_dim, capacity);
  const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(insertions, capacity));
  Transition t{nn::Vector(obs_dim), nn::Vector(act_dim), 0.0, nn::Vector(obs_dim), false};
  for (std::size_t i = 0; i < n; ++i) {
    io::ReadDoubles(in, t.state.data(), obs_dim);
    io::ReadDoubles(in, t.action.data(), act_dim);
    t.reward = io::Read<double>(in);
    io::ReadDoubles(in, t.next_state.data(), obs_dim);
    t.done = io::Read<std::uint8_t>(in) != 0;
    buffer.Push(t);
  }
  // Restore the counter so eviction resumes at the same ring position.
  buffer.insertions_ = insertions;
  if (insertions > capacity) {
    // Reloaded data sits in slots 0..n-1 oldest first; rotate so that the
    // oldest lands at slot insertions % capacity as in the original ring.
    const std::size_t shift = static_cast<std::size_t>(insertions % capacity);
    auto rotate = [&](auto& v, std::size_t width) {
      std::rotate(v.rbegin(), v.rbegin() + static_cast<std::ptrdiff_t>(shift * width), v.rend());
    };
    rotate(buffer.states_, obs_dim);
    rotate(buffer.actions_, act_dim);
    rotate(buffer.next_states_, obs_dim);
    rotate(buffer.rewards_, 1);
    rotate(buffer.dones_, 1);
  }
  return buffer;
}

}  // namespace rim
