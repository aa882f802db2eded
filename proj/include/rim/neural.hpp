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

#include <Eigen/Dense>

#include "rim/rng.hpp"

// Dense multilayer perceptrons with hand-written backpropagation.
//
// Batches are stored column-wise: a (features x batch) matrix holds one
// sample per column. Hidden layers use ReLU; the output layer uses either
// tanh (actors) or identity (critics).
namespace rim::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation : std::uint8_t { kTanh = 0, kIdentity = 1 };

struct Layer {
  Matrix weight;  // (out x in)
  Vector bias;    // (out)
};

struct MlpParams {
  std::vector<std::size_t> dims;  // input, hidden..., output
  Activation output_activation = Activation::kTanh;
  std::vector<Layer> layers;

  MlpParams() = default;
  // Zero-initialized parameters of the given shape.
  MlpParams(std::vector<std::size_t> layer_dims, Activation output);

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  static MlpParams RandomInit(std::vector<std::size_t> layer_dims, Activation output,
                              Rng& rng);

  std::size_t input_dim() const { return dims.front(); }
  std::size_t output_dim() const { return dims.back(); }
  std::size_t num_params() const;

  bool SameShape(const MlpParams& other) const;
  bool AllFinite() const;
  void SetZero();
};

// Bitwise equality of every parameter (distinguishes -0.0 from 0.0).
bool BitEqual(const MlpParams& a, const MlpParams& b);

// Parameters laid out layer by layer, row-major weights then biases.
std::vector<double> Flatten(const MlpParams& params);
void AssignFlat(MlpParams& params, const std::vector<double>& flat);

// Calls fn(double&) on every scalar in Flatten order.
template <typename Fn>
void ForEachScalar(MlpParams& params, Fn&& fn) {
  for (auto& layer : params.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) fn(layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) fn(layer.bias(r));
  }
}

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> activations;
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

struct BackwardResult {
  MlpParams param_grads;
  Matrix input_grad;
};

ForwardResult MlpForward(const MlpParams& params, const Matrix& inputs);
ForwardResult MlpForward(const MlpParams& params, const Vector& input);

// Forward pass without keeping the cache.
Matrix Predict(const MlpParams& params, const Matrix& inputs);
Vector Predict(const MlpParams& params, const Vector& input);

// Gradients of sum(output .* output_grad) with respect to every parameter and
// to the input. Parameter gradients are summed over the batch columns.
BackwardResult MlpBackward(const MlpParams& params, const ForwardCache& cache,
                           const Matrix& output_grad);

struct AdamState {
  MlpParams first_moment;
  MlpParams second_moment;
  std::uint64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState For(const MlpParams& params, double learning_rate);
};

// One bias-corrected Adam descent step. Throws NumericalError naming the
// layer if a gradient is not finite; params and state are then untouched.
void AdamStep(AdamState& state, MlpParams& params, const MlpParams& grads);

// target <- (1 - tau) * target + tau * source; tau = 1 copies bit-exactly.
void SoftUpdate(MlpParams& target, const MlpParams& source, double tau);

// Each scalar independently gets N(0, (noise_scale * (1 + |p|))^2) added with
// probability per_param_prob.
MlpParams PerturbParams(const MlpParams& params, double per_param_prob, double noise_scale,
                        Rng& rng);

void SaveParams(std::ostream& out, const MlpParams& params);
MlpParams LoadParams(std::istream& in);

void SaveAdam(std::ostream& out, const AdamState& state);
AdamState LoadAdam(std::istream& in);

}  // namespace rim::nn
