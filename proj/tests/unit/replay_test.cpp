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

#include "rim/errors.hpp"
#include "rim/replay.hpp"

namespace rim {
namespace {

Transition Make(double tag) {
  Transition t;
  t.state = nn::Vector::Constant(2, tag);
  t.action = nn::Vector::Constant(1, 0.5);
  t.reward = tag;
  t.next_state = nn::Vector::Constant(2, tag + 1.0);
  t.done = false;
  return t;
}

TEST(ReplayBuffer, EvictsOldestFirst) {
  ReplayBuffer buf(2, 1, 2);
  buf.Push(Make(1));
  buf.Push(Make(2));
  buf.Push(Make(3));
  ASSERT_EQ(buf.size(), 2u);
  EXPECT_EQ(buf.At(0).reward, 2.0);
  EXPECT_EQ(buf.At(1).reward, 3.0);
}

TEST(ReplayBuffer, SizeTracksInsertions) {
  ReplayBuffer buf(2, 1, 10);
  EXPECT_EQ(buf.size(), 0u);
  for (int i = 0; i < 5; ++i) buf.Push(Make(i));
  EXPECT_EQ(buf.size(), 5u);
  for (int i = 5; i < 15; ++i) buf.Push(Make(i));
  EXPECT_EQ(buf.size(), 10u);
  EXPECT_EQ(buf.insertions(), 15u);
  for (std::size_t i = 0; i < buf.size(); ++i) EXPECT_EQ(buf.At(i).reward, 5.0 + i);
}

TEST(ReplayBuffer, RejectsWrongShapes) {
  ReplayBuffer buf(2, 1, 4);
  Transition t = Make(0);
  t.state = nn::Vector::Zero(3);
  EXPECT_THROW(buf.Push(t), ContractViolation);
}

TEST(ReplayBuffer, SamplingEmptyThrows) {
  ReplayBuffer buf(2, 1, 4);
  Rng rng(0);
  EXPECT_THROW(buf.Sample(1, rng), ContractViolation);
}

TEST(ReplayBuffer, SingleItemRepeats) {
  ReplayBuffer buf(2, 1, 4);
  buf.Push(Make(7));
  Rng rng(0);
  const auto batch = buf.Sample(4, rng);
  ASSERT_EQ(batch.size(), 4u);
  for (const auto& t : batch) EXPECT_EQ(t.reward, 7.0);
}

TEST(ReplayBuffer, SamplesUniformly) {
  ReplayBuffer buf(2, 1, 10);
  for (int i = 0; i < 10; ++i) buf.Push(Make(i));
  Rng rng(123);
  std::vector<int> counts(10, 0);
  const TransitionBatch batch = buf.SampleBatch(100000, rng);
  for (std::size_t i = 0; i < batch.size(); ++i) ++counts[static_cast<int>(batch.rewards(i))];
  // Binomial(100000, 0.1): sd = 94.87.
  const double sd = std::sqrt(100000 * 0.1 * 0.9);
  for (int c : counts) EXPECT_LE(std::abs(c - 10000), 3.0 * sd);
}

TEST(ReplayBuffer, SamplingIsSeedDeterministic) {
  ReplayBuffer buf(2, 1, 50);
  for (int i = 0; i < 50; ++i) buf.Push(Make(i));
  Rng a(5);
  Rng b(5);
  const auto x = buf.SampleBatch(64, a);
  const auto y = buf.SampleBatch(64, b);
  EXPECT_TRUE(x.rewards == y.rewards);
  EXPECT_TRUE(x.states == y.states);
}

TEST(ReplayBuffer, NeverSamplesEvicted) {
  ReplayBuffer buf(2, 1, 8);
  for (int i = 0; i < 30; ++i) buf.Push(Make(i));
  Rng rng(2);
  const auto batch = buf.SampleBatch(2000, rng);
  EXPECT_GE(batch.rewards.minCoeff(), 22.0);
  EXPECT_TRUE(batch.next_states.row(0) == (batch.rewards.array() + 1.0).matrix().transpose());
}

TEST(ReplayBuffer, SaveLoadRoundTrip) {
  ReplayBuffer buf(2, 1, 5);
  for (int i = 0; i < 8; ++i) {
    Transition t = Make(i);
    t.done = i % 3 == 0;
    buf.Push(t);
  }
  std::stringstream ss;
  buf.Save(ss);
  ReplayBuffer loaded = ReplayBuffer::Load(ss);
  ASSERT_EQ(loaded.size(), buf.size());
  EXPECT_EQ(loaded.insertions(), buf.insertions());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    EXPECT_EQ(loaded.At(i).reward, buf.At(i).reward);
    EXPECT_EQ(loaded.At(i).done, buf.At(i).done);
  }
  loaded.Push(Make(100));
  EXPECT_EQ(loaded.At(0).reward, 4.0);
  EXPECT_EQ(loaded.At(4).reward, 100.0);
}

}  // namespace
}  // namespace rim
