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
#ifndef SIT_NUMERIC_HPP_
#define SIT_NUMERIC_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "sit/matrix.hpp"

namespace sit {

enum class Activation { kLinear, kRelu, kSigmoid, kTanh };

std::string_view activation_name(Activation kind);
Activation parse_activation(std::string_view name);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::kRelu;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

void validate(const LayerSpec& spec);

// out[i,j] = sum_k x[i,k] * w[k,j] + b[j]
Matrix affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b);

Matrix activation_forward(const Matrix& z, Activation kind);
// upstream (elementwise) times the derivative of the activation at z.
Matrix activation_backward(const Matrix& z, const Matrix& upstream,
                           Activation kind);

// Max-subtracted softmax. Throws on an empty input.
Vector softmax(std::span<const double> z);
// Row-wise softmax of a logit matrix.
Matrix softmax_rows(const Matrix& logits);

// -log softmax(logits)[label], computed in log space.
double cross_entropy(std::span<const double> logits, std::size_t label);
// softmax(logits) - onehot(label).
Vector cross_entropy_grad(std::span<const double> logits, std::size_t label);

enum class Reduction { kSum, kMean };

std::string_view reduction_name(Reduction r);
Reduction parse_reduction(std::string_view name);

struct SoftmaxLoss {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits, same shape as the logits
};

// Batched fused softmax cross-entropy. Labels must be < logits.cols().
SoftmaxLoss softmax_cross_entropy(const Matrix& logits,
                                  std::span<const std::uint32_t> labels,
                                  Reduction reduction);

// param - mu * grad
Matrix sgd_step(const Matrix& param, const Matrix& grad, double mu);
Vector sgd_step(std::span<const double> param, std::span<const double> grad,
                double mu);

using ScalarFn = std::function<double(const Matrix&)>;

// Central differences (f(x + h e) - f(x - h e)) / 2h for every coordinate.
Matrix finite_diff_grad(const ScalarFn& f, const Matrix& at, double h = 1e-5);

// Uniform in +-sqrt(6 / (in + out)).
Matrix glorot_uniform(std::size_t in_dim, std::size_t out_dim,
                      std::mt19937_64& rng);

}  // namespace sit

#endif  // SIT_NUMERIC_HPP_
