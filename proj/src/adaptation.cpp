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
#include "sit/adaptation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "sit/error.hpp"
#include "sit/evaluation.hpp"
#include "sit/objectives.hpp"
#include "sit/trainer.hpp"

namespace sit {

double default_adapt_mu(double training_mu) { return 0.1 * training_mu; }

std::vector<std::uint32_t> pseudo_label(const ModelParams& params, const Matrix& frames) {
  return argmax_rows(acoustic_posteriors(params, frames));
}

namespace {

void check_layers(const ModelParams& params, const AdaptConfig& config) {
  const std::size_t depth = params.feature.size() + params.senone.size();
  for (std::size_t l : config.layers_to_adapt) {
    if (l >= depth) {
      fail(ErrorCode::kArgument, "adapt layer index " + std::to_string(l) +
                                     " out of range for a " + std::to_string(depth) +
                                     "-layer acoustic stack");
    }
  }
}

}  // namespace

ModelParams adapt_with_targets(const ModelParams& params, const Matrix& frames,
                               std::span<const std::uint32_t> targets,
                               const AdaptConfig& config, double training_mu) {
  if (frames.rows() == 0) fail(ErrorCode::kArgument, "no frames to adapt on");
  if (targets.size() != frames.rows())
    fail(ErrorCode::kDimension, "adaptation targets are not aligned with frames");
  check_layers(params, config);
  if (config.layers_to_adapt.empty()) return params;
  const double mu = config.mu_adapt.value_or(default_adapt_mu(training_mu));
  if (!(mu > 0.0)) fail(ErrorCode::kArgument, "adaptation learning rate must be > 0");

  ModelParams out = params;
  const std::size_t n_feature = out.feature.size();
  BatchSchedule schedule(frames.rows(), config.batch_size, config.seed);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& rows : schedule.next_epoch()) {
      const Matrix x = frames.gather_rows(rows);
      std::vector<std::uint32_t> y;
      y.reserve(rows.size());
      for (std::size_t r : rows) y.push_back(targets[r]);
      const SenoneGradients g = senone_gradients(x, y, out, config.reduction);
      for (std::size_t l : config.layers_to_adapt) {
        const bool in_feature = l < n_feature;
        DenseLayer& layer = in_feature ? out.feature[l] : out.senone[l - n_feature];
        const LayerGrad& grad = in_feature ? g.feature[l] : g.senone[l - n_feature];
        layer.weights = sgd_step(layer.weights, grad.weights, mu);
        layer.bias = sgd_step(layer.bias, grad.bias, mu);
      }
      if (!std::isfinite(g.loss) || std::abs(g.loss) > kDivergenceLimit)
        fail(ErrorCode::kDivergence, "adaptation loss diverged");
    }
  }
  return out;
}

ModelParams crt_adapt(const ModelParams& params, const FrameBatch& speaker_frames,
                      const AdaptConfig& config, double training_mu) {
  if (speaker_frames.size() == 0) fail(ErrorCode::kArgument, "no frames to adapt on");
  if (speaker_frames.distinct_speakers().size() != 1)
    fail(ErrorCode::kArgument, "CRT adapts to exactly one speaker at a time");
  const auto targets = pseudo_label(params, speaker_frames.frames);
  return adapt_with_targets(params, speaker_frames.frames, targets, config, training_mu);
}

std::vector<SpeakerAdaptation> adapt_per_speaker(const ModelParams& params,
                                                 const FrameBatch& test,
                                                 const AdaptConfig& config,
                                                 double training_mu) {
  std::vector<SpeakerAdaptation> out;
  for (std::uint32_t speaker : test.distinct_speakers()) {
    const FrameBatch frames = test.speaker_subset(speaker);
    SpeakerAdaptation result;
    result.row.speaker = speaker;
    result.row.pre_accuracy = frame_accuracy(params, frames);
    const auto targets = pseudo_label(params, frames.frames);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) agree += targets[i] == frames.senones[i];
    result.row.pseudo_label_agreement =
        static_cast<double>(agree) / static_cast<double>(targets.size());
    result.adapted = crt_adapt(params, frames, config, training_mu);
    result.row.post_accuracy = frame_accuracy(result.adapted, frames);
    out.push_back(std::move(result));
  }
  return out;
}

void write_adapt_report_csv(const std::vector<AdaptReportRow>& rows,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << std::setprecision(17) << "speaker,pre_accuracy,post_accuracy,pseudo_label_agreement\n";
  for (const auto& r : rows)
    out << r.speaker << ',' << r.pre_accuracy << ',' << r.post_accuracy << ','
        << r.pseudo_label_agreement << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace sit
