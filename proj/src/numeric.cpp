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
#include "sit/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "sit/error.hpp"

namespace sit {

std::string_view activation_name(Activation kind) {
  switch (kind) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "linear") return Activation::kLinear;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  fail(ErrorCode::kArgument, "unknown activation '" + std::string(name) + "'");
}

void validate(const LayerSpec& spec) {
  if (spec.in_dim < 1 || spec.out_dim < 1) {
    fail(ErrorCode::kArgument, "layer dimensions must be >= 1, got " +
                                   std::to_string(spec.in_dim) + "->" +
                                   std::to_string(spec.out_dim));
  }
}

Matrix affine_forward(const Matrix& x, const Matrix& w, std::span<const double> b) {
  if (x.cols() != w.rows() || w.cols() != b.size()) {
    fail(ErrorCode::kDimension,
         "affine_forward: input " + x.shape_string() + " vs weights " +
             w.shape_string() + " and bias [" + std::to_string(b.size()) + "]");
  }
  Matrix out = matmul(x, w);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
  return out;
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Matrix activation_forward(const Matrix& z, Activation kind) {
  Matrix out = z;
  switch (kind) {
    case Activation::kLinear:
      break;
    case Activation::kRelu:
      for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::kSigmoid:
      for (double& v : out.data()) v = sigmoid(v);
      break;
    case Activation::kTanh:
      for (double& v : out.data()) v = std::tanh(v);
      break;
  }
  return out;
}

Matrix activation_backward(const Matrix& z, const Matrix& upstream,
                           Activation kind) {
  require_same_shape(z, upstream, "activation_backward");
  Matrix out = upstream;
  auto o = out.data();
  auto zd = z.data();
  switch (kind) {
    case Activation::kLinear:
      break;
    case Activation::kRelu:
      for (std::size_t i = 0; i < o.size(); ++i)
        if (!(zd[i] > 0.0)) o[i] = 0.0;
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < o.size(); ++i) {
        const double s = sigmoid(zd[i]);
        o[i] *= s * (1.0 - s);
      }
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < o.size(); ++i) {
        const double t = std::tanh(zd[i]);
        o[i] *= 1.0 - t * t;
      }
      break;
  }
  return out;
}

namespace {

// Writes softmax(z) into out and returns log(sum exp(z - max)) + max.
double softmax_into(std::span<const double> z, std::span<double> out) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return m + std::log(sum);
}

void require_nonempty(std::span<const double> z) {
  if (z.empty()) fail(ErrorCode::kArgument, "softmax of an empty vector");
}

}  // namespace

Vector softmax(std::span<const double> z) {
  require_nonempty(z);
  Vector out(z.size());
  softmax_into(z, out);
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    require_nonempty(logits.row(i));
    softmax_into(logits.row(i), out.row(i));
  }
  return out;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  require_nonempty(logits);
  if (label >= logits.size()) {
    fail(ErrorCode::kArgument, "label " + std::to_string(label) +
                                   " out of range for " +
                                   std::to_string(logits.size()) + " classes");
  }
  Vector p(logits.size());
  const double log_z = softmax_into(logits, p);
  return std::max(0.0, log_z - logits[label]);
}

Vector cross_entropy_grad(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    fail(ErrorCode::kArgument, "label " + std::to_string(label) +
                                   " out of range for " +
                                   std::to_string(logits.size()) + " classes");
  }
  Vector g = softmax(logits);
  g[label] -= 1.0;
  return g;
}

std::string_view reduction_name(Reduction r) {
  return r == Reduction::kSum ? "sum" : "mean";
}

Reduction parse_reduction(std::string_view name) {
  if (name == "sum") return Reduction::kSum;
  if (name == "mean") return Reduction::kMean;
  fail(ErrorCode::kArgument, "unknown loss reduction '" + std::string(name) + "'");
}

SoftmaxLoss softmax_cross_entropy(const Matrix& logits,
                                  std::span<const std::uint32_t> labels,
                                  Reduction reduction) {
  if (labels.size() != logits.rows()) {
    fail(ErrorCode::kDimension,
         "softmax_cross_entropy: " + std::to_string(labels.size()) +
             " labels for logits " + logits.shape_string());
  }
  SoftmaxLoss out{0.0, Matrix(logits.rows(), logits.cols())};
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const std::size_t label = labels[i];
    if (label >= logits.cols()) {
      fail(ErrorCode::kArgument, "label " + std::to_string(label) +
                                     " out of range for " +
                                     std::to_string(logits.cols()) + " classes");
    }
    auto z = logits.row(i);
    auto g = out.grad.row(i);
    const double log_z = softmax_into(z, g);
    out.loss += std::max(0.0, log_z - z[label]);
    g[label] -= 1.0;
  }
  if (reduction == Reduction::kMean && logits.rows() > 0) {
    const double n = static_cast<double>(logits.rows());
    out.loss /= n;
    for (double& v : out.grad.data()) v /= n;
  }
  return out;
}

Matrix sgd_step(const Matrix& param, const Matrix& grad, double mu) {
  require_same_shape(param, grad, "sgd_step");
  if (!(mu >= 0.0)) fail(ErrorCode::kArgument, "learning rate must be >= 0");
  Matrix out = param;
  auto o = out.data();
  auto g = grad.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= mu * g[i];
  return out;
}

Vector sgd_step(std::span<const double> param, std::span<const double> grad,
                double mu) {
  if (param.size() != grad.size()) {
    fail(ErrorCode::kDimension, "sgd_step: vector length mismatch " +
                                    std::to_string(param.size()) + " vs " +
                                    std::to_string(grad.size()));
  }
  if (!(mu >= 0.0)) fail(ErrorCode::kArgument, "learning rate must be >= 0");
  Vector out(param.begin(), param.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= mu * grad[i];
  return out;
}

Matrix finite_diff_grad(const ScalarFn& f, const Matrix& at, double h) {
  if (!(h > 0.0)) fail(ErrorCode::kArgument, "finite difference step must be > 0");
  Matrix grad(at.rows(), at.cols());
  Matrix probe = at;
  auto p = probe.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double plus = f(probe);
    p[i] = saved - h;
    const double minus = f(probe);
    p[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      fail(ErrorCode::kNumeric,
           "non-finite function value at coordinate " + std::to_string(i));
    }
    grad.data()[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

Matrix glorot_uniform(std::size_t in_dim, std::size_t out_dim,
                      std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(in_dim, out_dim);
  for (double& v : w.data()) v = dist(rng);
  return w;
}

}  // namespace sit
