/* Copyright 2026 The SIT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SIT_MODEL_HPP_
#define SIT_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "sit/matrix.hpp"
#include "sit/numeric.hpp"

namespace sit {

struct DenseLayer {
  Matrix weights;  // in_dim x out_dim
  Vector bias;     // out_dim
  Activation activation = Activation::kRelu;

  LayerSpec spec() const { return {weights.rows(), weights.cols(), activation}; }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// An ordered list of dense layers applied bottom to top.
using Stack = std::vector<DenseLayer>;

struct LayerGrad {
  Matrix weights;
  Vector bias;
};
using StackGrad = std::vector<LayerGrad>;

// Intermediate values of a forward pass, kept for the backward pass.
struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l
  std::vector<Matrix> pre;     // pre-activations of layer l
};

// Seeded Glorot-uniform weights, zero biases. Hidden layers use
// hidden_activation; the top layer is linear (its softmax lives in the loss).
Stack init_stack(std::size_t in_dim, std::span<const std::size_t> hidden,
                 std::size_t out_dim, Activation hidden_activation,
                 std::mt19937_64& rng);

Matrix stack_forward(std::span<const DenseLayer> layers, const Matrix& x,
                     ForwardCache* cache = nullptr);

// Backpropagates grad_out (gradient wrt the stack's output activations).
// Fills grads (one entry per layer) and returns the gradient wrt the stack
// input, or an empty matrix when want_input_grad is false.
Matrix stack_backward(std::span<const DenseLayer> layers,
                      const ForwardCache& cache, const Matrix& grad_out,
                      StackGrad& grads, bool want_input_grad = true);

// Layer-size recipe for the acoustic stack and the speaker classifier.
struct Topology {
  std::vector<std::size_t> hidden{64, 64, 64, 64};
  std::vector<std::size_t> speaker_hidden{32, 32};
  Activation activation = Activation::kTanh;

  // 7 x 2048 acoustic stack with a 2 x 512 speaker classifier.
  static Topology full_scale();
};

// The three parameter groups. A single-stack (speaker-independent) model keeps
// all acoustic layers in `senone` and leaves `feature` and `speaker` empty.
struct ModelParams {
  Stack feature;  // M_f
  Stack senone;   // M_y, ends in n_senones logits
  Stack speaker;  // M_s, ends in n_speakers logits
  std::size_t n_senones = 0;
  std::size_t n_speakers = 0;

  bool is_split() const noexcept { return !feature.empty(); }
  std::size_t input_dim() const;
  // Width of the deep feature F (only meaningful for split models).
  std::size_t feature_dim() const;
  // Number of hidden layers in the acoustic stack (feature ++ senone, minus
  // the output layer).
  std::size_t hidden_layer_count() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Throws a dimension error if the groups do not chain together.
void validate(const ModelParams& params);

// feature ++ senone, the stack used for ASR-style prediction.
Stack acoustic_stack(const ModelParams& params);

struct Hyperparams {
  double lambda = 3.0;
  double mu = 0.002;
  std::size_t n_h = 2;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  Reduction reduction = Reduction::kSum;
  // Learning rate for the adversarial phase; unset means reuse mu.
  std::optional<double> sit_mu;
  // Epochs of speaker-classifier-only training on frozen features before the
  // adversarial updates start.
  std::size_t speaker_pretrain_epochs = 0;

  double adversarial_mu() const { return sit_mu.value_or(mu); }
};

// lambda >= 0, mu > 0, batch_size >= 1 and 1 <= n_h <= hidden_layers - 1.
void validate(const Hyperparams& hyper, std::size_t hidden_layers);

ModelParams init_si_model(std::size_t input_dim, const Topology& topology,
                          std::size_t n_senones, std::uint64_t seed);

// F = M_f(x). Errors name the offending layer index.
Matrix feature_extract(const Matrix& x, const Stack& theta_f);
// p_y(q | f); rows sum to one.
Matrix senone_posteriors(const Matrix& features, const Stack& theta_y);
// p_s(a | f); rows sum to one.
Matrix speaker_posteriors(const Matrix& features, const Stack& theta_s);
// p_y(q | x) through the whole acoustic stack.
Matrix acoustic_posteriors(const ModelParams& params, const Matrix& x);

// Deep feature F at depth n_h. For split models n_h is implied by `feature`
// and the argument is ignored.
Matrix deep_features(const ModelParams& params, const Matrix& x, std::size_t n_h);

// The gradient reversal layer has no parameters. Forward it is the identity:
// F reaches M_s unchanged. Backward it scales the incoming gradient by -lambda.
inline const Matrix& grl_forward(const Matrix& features) { return features; }
Matrix grl_backward(const Matrix& upstream, double lambda);

// First n_h layers become theta_f, the rest (hidden layers and output layer)
// theta_y. Values are copied bit-exactly.
std::pair<Stack, Stack> split_pretrained(const Stack& si_stack, std::size_t n_h);

// Splits a single-stack model at n_h and attaches a freshly initialized
// speaker classifier with n_speakers outputs.
ModelParams make_sit_model(const ModelParams& si_model, std::size_t n_h,
                           const Topology& topology, std::size_t n_speakers,
                           std::uint64_t seed);

std::vector<std::uint32_t> argmax_rows(const Matrix& m);

}  // namespace sit

#endif  // SIT_MODEL_HPP_
