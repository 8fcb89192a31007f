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
#ifndef SIT_OBJECTIVES_HPP_
#define SIT_OBJECTIVES_HPP_

#include <cstdint>
#include <span>

#include "sit/model.hpp"

namespace sit {

// Losses of one batch. total_loss == senone_loss - lambda * speaker_loss.
struct LossBreakdown {
  double senone_loss = 0.0;
  double speaker_loss = 0.0;
  double total_loss = 0.0;
  double lambda = 0.0;
};

using Labels = std::span<const std::uint32_t>;

// -sum_i log p_y(y_i | x_i) through M_f then M_y.
double senone_loss(const Matrix& x, Labels senones, const ModelParams& params,
                   Reduction reduction = Reduction::kSum);
// -sum_i log p_s(s_i | x_i) through M_f then M_s.
double speaker_loss(const Matrix& x, Labels speakers, const ModelParams& params,
                    Reduction reduction = Reduction::kSum);

double total_loss(double senone, double speaker, double lambda);

struct SenoneGradients {
  double loss = 0.0;
  StackGrad feature;  // d L_senone / d theta_f (empty for single-stack models)
  StackGrad senone;   // d L_senone / d theta_y
  std::size_t correct = 0;
};

struct SpeakerGradients {
  double loss = 0.0;
  StackGrad feature;  // d L_speaker / d theta_f
  StackGrad speaker;  // d L_speaker / d theta_s
  std::size_t correct = 0;
};

SenoneGradients senone_gradients(const Matrix& x, Labels senones,
                                 const ModelParams& params,
                                 Reduction reduction = Reduction::kSum);
SpeakerGradients speaker_gradients(const Matrix& x, Labels speakers,
                                   const ModelParams& params,
                                   Reduction reduction = Reduction::kSum);

// One forward and one backward pass over all three groups. The speaker
// branch's gradient at F goes through grl_backward before it is added to the
// senone branch's gradient, so theta_f receives
//   d L_senone / d theta_f - lambda * d L_speaker / d theta_f
// while theta_s receives the plain d L_speaker / d theta_s.
struct SitGradients {
  LossBreakdown losses;
  StackGrad feature;
  StackGrad senone;
  StackGrad speaker;
  std::size_t senone_correct = 0;
  std::size_t speaker_correct = 0;
};

SitGradients sit_gradients(const Matrix& x, Labels senones, Labels speakers,
                           const ModelParams& params, double lambda,
                           Reduction reduction = Reduction::kSum);

}  // namespace sit

#endif  // SIT_OBJECTIVES_HPP_
