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
#include "sit/model.hpp"

#include <algorithm>

#include "sit/error.hpp"

namespace sit {

Stack init_stack(std::size_t in_dim, std::span<const std::size_t> hidden,
                 std::size_t out_dim, Activation hidden_activation,
                 std::mt19937_64& rng) {
  Stack stack;
  std::size_t prev = in_dim;
  for (std::size_t width : hidden) {
    validate(LayerSpec{prev, width, hidden_activation});
    stack.push_back({glorot_uniform(prev, width, rng), Vector(width, 0.0),
                     hidden_activation});
    prev = width;
  }
  validate(LayerSpec{prev, out_dim, Activation::kLinear});
  stack.push_back(
      {glorot_uniform(prev, out_dim, rng), Vector(out_dim, 0.0), Activation::kLinear});
  return stack;
}

Matrix stack_forward(std::span<const DenseLayer> layers, const Matrix& x,
                     ForwardCache* cache) {
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    if (a.cols() != layer.weights.rows()) {
      fail(ErrorCode::kDimension,
           "layer " + std::to_string(l) + " expects input width " +
               std::to_string(layer.weights.rows()) + ", got " + a.shape_string());
    }
    Matrix z = affine_forward(a, layer.weights, layer.bias);
    Matrix next = activation_forward(z, layer.activation);
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(std::move(z));
    }
    a = std::move(next);
  }
  return a;
}

Matrix stack_backward(std::span<const DenseLayer> layers,
                      const ForwardCache& cache, const Matrix& grad_out,
                      StackGrad& grads, bool want_input_grad) {
  grads.assign(layers.size(), LayerGrad{});
  Matrix upstream = grad_out;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    Matrix dz = activation_backward(cache.pre[l], upstream, layer.activation);
    grads[l].weights = matmul_tn(cache.inputs[l], dz);
    grads[l].bias.assign(dz.cols(), 0.0);
    for (std::size_t i = 0; i < dz.rows(); ++i) {
      auto r = dz.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) grads[l].bias[j] += r[j];
    }
    if (l > 0 || want_input_grad) {
      upstream = matmul_nt(dz, layer.weights);
    } else {
      upstream = Matrix();
    }
  }
  return upstream;
}

Topology Topology::full_scale() {
  Topology t;
  t.hidden.assign(7, 2048);
  t.speaker_hidden.assign(2, 512);
  return t;
}

std::size_t ModelParams::input_dim() const {
  if (!feature.empty()) return feature.front().weights.rows();
  if (!senone.empty()) return senone.front().weights.rows();
  return 0;
}

std::size_t ModelParams::feature_dim() const {
  return feature.empty() ? 0 : feature.back().weights.cols();
}

std::size_t ModelParams::hidden_layer_count() const {
  const std::size_t total = feature.size() + senone.size();
  return total == 0 ? 0 : total - 1;
}

namespace {

void check_chain(const Stack& stack, std::size_t in_dim, const char* group) {
  std::size_t prev = in_dim;
  for (std::size_t l = 0; l < stack.size(); ++l) {
    const DenseLayer& layer = stack[l];
    if (layer.weights.rows() != prev || layer.bias.size() != layer.weights.cols()) {
      fail(ErrorCode::kDimension,
           std::string(group) + " layer " + std::to_string(l) + " has weights " +
               layer.weights.shape_string() + " and bias [" +
               std::to_string(layer.bias.size()) + "], expected input width " +
               std::to_string(prev));
    }
    prev = layer.weights.cols();
  }
}

std::size_t output_width(const Stack& stack, std::size_t fallback) {
  return stack.empty() ? fallback : stack.back().weights.cols();
}

}  // namespace

void validate(const ModelParams& params) {
  if (params.senone.empty())
    fail(ErrorCode::kDimension, "model has no senone classifier layers");
  const std::size_t in = params.input_dim();
  check_chain(params.feature, in, "feature");
  const std::size_t f_dim = output_width(params.feature, in);
  check_chain(params.senone, f_dim, "senone");
  if (output_width(params.senone, 0) != params.n_senones) {
    fail(ErrorCode::kDimension,
         "senone output width " + std::to_string(output_width(params.senone, 0)) +
             " != senone count " + std::to_string(params.n_senones));
  }
  if (!params.speaker.empty()) {
    if (!params.is_split())
      fail(ErrorCode::kDimension, "speaker classifier requires a feature extractor");
    check_chain(params.speaker, f_dim, "speaker");
    if (output_width(params.speaker, 0) != params.n_speakers) {
      fail(ErrorCode::kDimension,
           "speaker output width " + std::to_string(output_width(params.speaker, 0)) +
               " != speaker count " + std::to_string(params.n_speakers));
    }
  }
}

Stack acoustic_stack(const ModelParams& params) {
  Stack out = params.feature;
  out.insert(out.end(), params.senone.begin(), params.senone.end());
  return out;
}

void validate(const Hyperparams& hyper, std::size_t hidden_layers) {
  if (!(hyper.lambda >= 0.0)) fail(ErrorCode::kArgument, "lambda must be >= 0");
  if (!(hyper.mu > 0.0)) fail(ErrorCode::kArgument, "mu must be > 0");
  if (hyper.sit_mu && !(*hyper.sit_mu > 0.0))
    fail(ErrorCode::kArgument, "sit_mu must be > 0");
  if (hyper.batch_size < 1) fail(ErrorCode::kArgument, "batch_size must be >= 1");
  if (hyper.n_h < 1 || hyper.n_h + 1 > hidden_layers) {
    fail(ErrorCode::kArgument,
         "n_h=" + std::to_string(hyper.n_h) + " outside [1, " +
             std::to_string(hidden_layers > 0 ? hidden_layers - 1 : 0) + "]");
  }
}

ModelParams init_si_model(std::size_t input_dim, const Topology& topology,
                          std::size_t n_senones, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelParams params;
  params.senone =
      init_stack(input_dim, topology.hidden, n_senones, topology.activation, rng);
  params.n_senones = n_senones;
  return params;
}

Matrix feature_extract(const Matrix& x, const Stack& theta_f) {
  return stack_forward(theta_f, x);
}

Matrix senone_posteriors(const Matrix& features, const Stack& theta_y) {
  return softmax_rows(stack_forward(theta_y, features));
}

Matrix speaker_posteriors(const Matrix& features, const Stack& theta_s) {
  return softmax_rows(stack_forward(theta_s, features));
}

Matrix acoustic_posteriors(const ModelParams& params, const Matrix& x) {
  return senone_posteriors(feature_extract(x, params.feature), params.senone);
}

Matrix deep_features(const ModelParams& params, const Matrix& x, std::size_t n_h) {
  if (params.is_split()) return feature_extract(x, params.feature);
  if (n_h < 1 || n_h >= params.senone.size()) {
    fail(ErrorCode::kArgument, "feature depth " + std::to_string(n_h) +
                                   " outside the acoustic stack");
  }
  return stack_forward(std::span<const DenseLayer>(params.senone).first(n_h), x);
}

Matrix grl_backward(const Matrix& upstream, double lambda) {
  if (!(lambda >= 0.0)) fail(ErrorCode::kArgument, "lambda must be >= 0");
  return scale(upstream, -lambda);
}

std::pair<Stack, Stack> split_pretrained(const Stack& si_stack, std::size_t n_h) {
  const std::size_t hidden = si_stack.empty() ? 0 : si_stack.size() - 1;
  if (n_h < 1 || n_h + 1 > hidden) {
    fail(ErrorCode::kArgument,
         "cannot split " + std::to_string(hidden) + " hidden layers at n_h=" +
             std::to_string(n_h));
  }
  Stack feature(si_stack.begin(), si_stack.begin() + static_cast<std::ptrdiff_t>(n_h));
  Stack senone(si_stack.begin() + static_cast<std::ptrdiff_t>(n_h), si_stack.end());
  return {std::move(feature), std::move(senone)};
}

ModelParams make_sit_model(const ModelParams& si_model, std::size_t n_h,
                           const Topology& topology, std::size_t n_speakers,
                           std::uint64_t seed) {
  if (si_model.is_split())
    fail(ErrorCode::kArgument, "SIT initialization expects a single-stack model");
  ModelParams out;
  std::tie(out.feature, out.senone) = split_pretrained(si_model.senone, n_h);
  out.n_senones = si_model.n_senones;
  out.n_speakers = n_speakers;
  std::mt19937_64 rng(seed);
  out.speaker = init_stack(out.feature_dim(), topology.speaker_hidden, n_speakers,
                           topology.activation, rng);
  return out;
}

std::vector<std::uint32_t> argmax_rows(const Matrix& m) {
  std::vector<std::uint32_t> out(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    // max_element returns the first maximum, so ties go to the lowest index.
    out[i] = static_cast<std::uint32_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

}  // namespace sit
