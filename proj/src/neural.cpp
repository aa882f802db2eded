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

#include "rim/neural.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "rim/binary_io.hpp"
#include "rim/errors.hpp"

namespace rim::nn {
namespace {

constexpr char kParamsMagic[5] = "RIMN";
constexpr char kAdamMagic[5] = "RIMO";
constexpr std::uint32_t kFormatVersion = 1;

void CheckDims(const std::vector<std::size_t>& dims) {
  Require(dims.size() >= 2, "an MLP needs at least input and output dims");
  for (std::size_t d : dims) Require(d > 0, "layer dims must be positive");
}

}  // namespace

MlpParams::MlpParams(std::vector<std::size_t> layer_dims, Activation output)
    : dims(std::move(layer_dims)), output_activation(output) {
  CheckDims(dims);
  layers.reserve(dims.size() - 1);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto in = static_cast<Eigen::Index>(dims[k]);
    const auto out = static_cast<Eigen::Index>(dims[k + 1]);
    layers.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
  }
}

MlpParams MlpParams::RandomInit(std::vector<std::size_t> layer_dims, Activation output,
                                Rng& rng) {
  MlpParams params(std::move(layer_dims), output);
  for (auto& layer : params.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = dist(rng);
  }
  return params;
}

std::size_t MlpParams::num_params() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  }
  return n;
}

bool MlpParams::SameShape(const MlpParams& other) const {
  return dims == other.dims && output_activation == other.output_activation;
}

bool MlpParams::AllFinite() const {
  for (const auto& layer : layers) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

void MlpParams::SetZero() {
  for (auto& layer : layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
}

bool BitEqual(const MlpParams& a, const MlpParams& b) {
  if (!a.SameShape(b)) return false;
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    const auto& la = a.layers[k];
    const auto& lb = b.layers[k];
    if (std::memcmp(la.weight.data(), lb.weight.data(),
                    sizeof(double) * static_cast<std::size_t>(la.weight.size())) != 0 ||
        std::memcmp(la.bias.data(), lb.bias.data(),
                    sizeof(double) * static_cast<std::size_t>(la.bias.size())) != 0) {
      return false;
    }
  }
  return true;
}

std::vector<double> Flatten(const MlpParams& params) {
  std::vector<double> flat;
  flat.reserve(params.num_params());
  auto& mutable_params = const_cast<MlpParams&>(params);
  ForEachScalar(mutable_params, [&](double& v) { flat.push_back(v); });
  return flat;
}

void AssignFlat(MlpParams& params, const std::vector<double>& flat) {
  Require(flat.size() == params.num_params(), "flat parameter vector has wrong length");
  std::size_t i = 0;
  ForEachScalar(params, [&](double& v) { v = flat[i++]; });
}

ForwardResult MlpForward(const MlpParams& params, const Matrix& inputs) {
  Require(!params.layers.empty(), "MLP has no layers");
  Require(static_cast<std::size_t>(inputs.rows()) == params.input_dim(),
          "input length " + std::to_string(inputs.rows()) + " does not match layer_dims[0] = " +
              std::to_string(params.input_dim()));
  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.input = inputs;
  cache.pre_activations.reserve(params.layers.size());
  cache.activations.reserve(params.layers.size());
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    const auto& layer = params.layers[k];
    const Matrix& below = k == 0 ? cache.input : cache.activations.back();
    Matrix z = layer.weight * below;
    z.colwise() += layer.bias;
    Matrix a;
    if (k < last) {
      a = z.cwiseMax(0.0);
    } else if (params.output_activation == Activation::kTanh) {
      a = z.array().tanh().matrix();
    } else {
      a = z;
    }
    cache.pre_activations.push_back(std::move(z));
    cache.activations.push_back(std::move(a));
  }
  result.output = cache.activations.back();
  return result;
}

ForwardResult MlpForward(const MlpParams& params, const Vector& input) {
  return MlpForward(params, Matrix(input));
}

Matrix Predict(const MlpParams& params, const Matrix& inputs) {
  Require(static_cast<std::size_t>(inputs.rows()) == params.input_dim(),
          "input length does not match layer_dims[0]");
  const std::size_t last = params.layers.size() - 1;
  Matrix a = inputs;
  for (std::size_t k = 0; k <= last; ++k) {
    const auto& layer = params.layers[k];
    Matrix z = layer.weight * a;
    z.colwise() += layer.bias;
    if (k < last) {
      a = z.cwiseMax(0.0);
    } else if (params.output_activation == Activation::kTanh) {
      a = z.array().tanh().matrix();
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Vector Predict(const MlpParams& params, const Vector& input) {
  return Predict(params, Matrix(input)).col(0);
}

BackwardResult MlpBackward(const MlpParams& params, const ForwardCache& cache,
                           const Matrix& output_grad) {
  const std::size_t n_layers = params.layers.size();
  Require(cache.activations.size() == n_layers && cache.pre_activations.size() == n_layers,
          "forward cache does not match the network depth");
  Require(static_cast<std::size_t>(output_grad.rows()) == params.output_dim() &&
              output_grad.cols() == cache.input.cols(),
          "output gradient shape does not match the cached forward pass");
  for (std::size_t k = 0; k < n_layers; ++k) {
    Require(cache.activations[k].rows() == params.layers[k].weight.rows(),
            "forward cache shape does not match params");
  }

  BackwardResult result{MlpParams(params.dims, params.output_activation), Matrix()};
  Matrix delta;
  const Matrix& out = cache.activations.back();
  if (params.output_activation == Activation::kTanh) {
    delta = output_grad.array() * (1.0 - out.array().square());
  } else {
    delta = output_grad;
  }
  for (std::size_t k = n_layers; k-- > 0;) {
    const Matrix& below = k == 0 ? cache.input : cache.activations[k - 1];
    auto& grad = result.param_grads.layers[k];
    grad.weight.noalias() = delta * below.transpose();
    grad.bias = delta.rowwise().sum();
    Matrix upstream = params.layers[k].weight.transpose() * delta;
    if (k == 0) {
      result.input_grad = std::move(upstream);
    } else {
      const Matrix& z = cache.pre_activations[k - 1];
      delta = (z.array() > 0.0).select(upstream, 0.0);
    }
  }
  return result;
}

AdamState AdamState::For(const MlpParams& params, double learning_rate) {
  Require(learning_rate > 0.0, "learning rate must be positive");
  AdamState state;
  state.first_moment = MlpParams(params.dims, params.output_activation);
  state.second_moment = MlpParams(params.dims, params.output_activation);
  state.learning_rate = learning_rate;
  return state;
}

void AdamStep(AdamState& state, MlpParams& params, const MlpParams& grads) {
  Require(params.SameShape(grads), "gradient shape does not match params");
  Require(params.SameShape(state.first_moment) && params.SameShape(state.second_moment),
          "optimizer state shape does not match params");
  for (std::size_t k = 0; k < grads.layers.size(); ++k) {
    if (!grads.layers[k].weight.allFinite() || !grads.layers[k].bias.allFinite()) {
      throw NumericalError("non-finite gradient in layer " + std::to_string(k));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  const double step_size = state.learning_rate / correction1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double eps = state.epsilon;
  const auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -=
        step_size * m.array() / ((v.array() / correction2).sqrt() + eps);
  };
  for (std::size_t k = 0; k < grads.layers.size(); ++k) {
    update(params.layers[k].weight, state.first_moment.layers[k].weight,
           state.second_moment.layers[k].weight, grads.layers[k].weight);
    update(params.layers[k].bias, state.first_moment.layers[k].bias,
           state.second_moment.layers[k].bias, grads.layers[k].bias);
  }
}

void SoftUpdate(MlpParams& target, const MlpParams& source, double tau) {
  Require(tau > 0.0 && tau <= 1.0, "soft update rate must lie in (0, 1]");
  Require(target.SameShape(source), "soft update between differently shaped networks");
  if (tau == 1.0) {
    target = source;
    return;
  }
  for (std::size_t k = 0; k < target.layers.size(); ++k) {
    auto& t = target.layers[k];
    const auto& s = source.layers[k];
    t.weight = (1.0 - tau) * t.weight + tau * s.weight;
    t.bias = (1.0 - tau) * t.bias + tau * s.bias;
  }
}

MlpParams PerturbParams(const MlpParams& params, double per_param_prob, double noise_scale,
                        Rng& rng) {
  Require(per_param_prob >= 0.0 && per_param_prob <= 1.0,
          "mutation probability must lie in [0, 1]");
  Require(noise_scale >= 0.0, "mutation noise scale must be non-negative");
  MlpParams mutated = params;
  if (per_param_prob == 0.0) return mutated;
  ForEachScalar(mutated, [&](double& p) {
    if (Uniform01(rng) < per_param_prob && noise_scale > 0.0) {
      p += Gaussian(rng, noise_scale * (1.0 + std::abs(p)));
    }
  });
  return mutated;
}

void SaveParams(std::ostream& out, const MlpParams& params) {
  io::WriteHeader(out, kParamsMagic, kFormatVersion);
  io::Write<std::uint8_t>(out, static_cast<std::uint8_t>(params.output_activation));
  io::Write<std::uint32_t>(out, static_cast<std::uint32_t>(params.dims.size()));
  for (std::size_t d : params.dims) io::Write<std::uint64_t>(out, d);
  for (const auto& layer : params.layers) {
    // Eigen is column-major; emit rows explicitly.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        io::Write<double>(out, layer.weight(r, c));
      }
    }
    io::WriteDoubles(out, layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
}

MlpParams LoadParams(std::istream& in) {
  const std::uint32_t version = io::ReadHeader(in, kParamsMagic);
  Require(version == kFormatVersion, "unsupported parameter format version");
  const auto act = io::Read<std::uint8_t>(in);
  Require(act <= 1, "unknown output activation tag");
  const auto n_dims = io::Read<std::uint32_t>(in);
  Require(n_dims >= 2 && n_dims < 64, "implausible layer count in parameter file");
  std::vector<std::size_t> dims(n_dims);
  for (auto& d : dims) d = static_cast<std::size_t>(io::Read<std::uint64_t>(in));
  MlpParams params(dims, static_cast<Activation>(act));
  for (auto& layer : params.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = io::Read<double>(in);
      }
    }
    io::ReadDoubles(in, layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  return params;
}

void SaveAdam(std::ostream& out, const AdamState& state) {
  io::WriteHeader(out, kAdamMagic, kFormatVersion);
  io::Write<std::uint64_t>(out, state.step);
  io::Write<double>(out, state.learning_rate);
  io::Write<double>(out, state.beta1);
  io::Write<double>(out, state.beta2);
  io::Write<double>(out, state.epsilon);
  SaveParams(out, state.first_moment);
  SaveParams(out, state.second_moment);
}

AdamState LoadAdam(std::istream& in) {
  const std::uint32_t version = io::ReadHeader(in, kAdamMagic);
  Require(version == kFormatVersion, "unsupported optimizer format version");
  AdamState state;
  state.step = io::Read<std::uint64_t>(in);
  state.learning_rate = io::Read<double>(in);
  state.beta1 = io::Read<double>(in);
  state.beta2 = io::Read<double>(in);
  state.epsilon = io::Read<double>(in);
  state.first_moment = LoadParams(in);
  state.second_moment = LoadParams(in);
  return state;
}

}  // namespace rim::nn
