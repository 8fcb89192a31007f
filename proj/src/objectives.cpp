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
#include "sit/objectives.hpp"

#include "sit/error.hpp"

namespace sit {

namespace {

std::size_t count_correct(const Matrix& logits, Labels labels) {
  const auto predicted = argmax_rows(logits);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == labels[i]) ++correct;
  return correct;
}

void require_speaker_branch(const ModelParams& params) {
  if (!params.is_split() || params.speaker.empty())
    fail(ErrorCode::kArgument, "model has no speaker classifier");
}

}  // namespace

double senone_loss(const Matrix& x, Labels senones, const ModelParams& params,
                   Reduction reduction) {
  const Matrix f = feature_extract(x, params.feature);
  return softmax_cross_entropy(stack_forward(params.senone, f), senones, reduction).loss;
}

double speaker_loss(const Matrix& x, Labels speakers, const ModelParams& params,
                    Reduction reduction) {
  require_speaker_branch(params);
  const Matrix f = feature_extract(x, params.feature);
  return softmax_cross_entropy(stack_forward(params.speaker, f), speakers, reduction)
      .loss;
}

double total_loss(double senone, double speaker, double lambda) {
  return senone - lambda * speaker;
}

SenoneGradients senone_gradients(const Matrix& x, Labels senones,
                                 const ModelParams& params, Reduction reduction) {
  SenoneGradients out;
  ForwardCache f_cache, y_cache;
  const Matrix f = stack_forward(params.feature, x, &f_cache);
  const Matrix logits = stack_forward(params.senone, f, &y_cache);
  const SoftmaxLoss ce = softmax_cross_entropy(logits, senones, reduction);
  out.loss = ce.loss;
  out.correct = count_correct(logits, senones);
  const Matrix g_f =
      stack_backward(params.senone, y_cache, ce.grad, out.senone, params.is_split());
  if (params.is_split())
    stack_backward(params.feature, f_cache, g_f, out.feature, false);
  return out;
}

SpeakerGradients speaker_gradients(const Matrix& x, Labels speakers,
                                   const ModelParams& params, Reduction reduction) {
  require_speaker_branch(params);
  SpeakerGradients out;
  ForwardCache f_cache, s_cache;
  const Matrix f = stack_forward(params.feature, x, &f_cache);
  const Matrix logits = stack_forward(params.speaker, f, &s_cache);
  const SoftmaxLoss ce = softmax_cross_entropy(logits, speakers, reduction);
  out.loss = ce.loss;
  out.correct = count_correct(logits, speakers);
  const Matrix g_f = stack_backward(params.speaker, s_cache, ce.grad, out.speaker);
  stack_backward(params.feature, f_cache, g_f, out.feature, false);
  return out;
}

SitGradients sit_gradients(const Matrix& x, Labels senones, Labels speakers,
                           const ModelParams& params, double lambda,
                           Reduction reduction) {
  require_speaker_branch(params);
  SitGradients out;
  ForwardCache f_cache, y_cache, s_cache;
  const Matrix f = stack_forward(params.feature, x, &f_cache);
  const Matrix y_logits = stack_forward(params.senone, f, &y_cache);
  const Matrix s_logits = stack_forward(params.speaker, grl_forward(f), &s_cache);

  const SoftmaxLoss y_ce = softmax_cross_entropy(y_logits, senones, reduction);
  const SoftmaxLoss s_ce = softmax_cross_entropy(s_logits, speakers, reduction);
  out.losses = {y_ce.loss, s_ce.loss, total_loss(y_ce.loss, s_ce.loss, lambda), lambda};
  out.senone_correct = count_correct(y_logits, senones);
  out.speaker_correct = count_correct(s_logits, speakers);

  Matrix g_f = stack_backward(params.senone, y_cache, y_ce.grad, out.senone);
  const Matrix g_s = stack_backward(params.speaker, s_cache, s_ce.grad, out.speaker);
  const Matrix reversed = grl_backward(g_s, lambda);
  auto gd = g_f.data();
  auto rd = reversed.data();
  for (std::size_t i = 0; i < gd.size(); ++i) gd[i] += rd[i];
  stack_backward(params.feature, f_cache, g_f, out.feature, false);
  return out;
}

}  // namespace sit
