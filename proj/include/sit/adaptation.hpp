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
#ifndef SIT_ADAPTATION_HPP_
#define SIT_ADAPTATION_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sit/corpus.hpp"
#include "sit/model.hpp"

namespace sit {

// Constrained re-training: only the listed layers of the acoustic stack
// (feature ++ senone, indexed from the input side) are updated.
struct AdaptConfig {
  std::set<std::size_t> layers_to_adapt{0, 1};
  // Unset means 0.1 x the training learning rate.
  std::optional<double> mu_adapt;
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  Reduction reduction = Reduction::kSum;
  std::uint64_t seed = 11;
};

double default_adapt_mu(double training_mu);

// Per-frame argmax of the senone posteriors; ties go to the lowest index.
std::vector<std::uint32_t> pseudo_label(const ModelParams& params, const Matrix& frames);

// Cross-entropy SGD against `targets`, touching only config.layers_to_adapt.
// Every other parameter is returned bit-identical.
ModelParams adapt_with_targets(const ModelParams& params, const Matrix& frames,
                               std::span<const std::uint32_t> targets,
                               const AdaptConfig& config, double training_mu);

// Unsupervised adaptation: targets come from pseudo_label on the unadapted
// model, computed once before any update.
ModelParams crt_adapt(const ModelParams& params, const FrameBatch& speaker_frames,
                      const AdaptConfig& config, double training_mu);

struct AdaptReportRow {
  std::uint32_t speaker = 0;
  double pre_accuracy = 0.0;
  double post_accuracy = 0.0;
  double pseudo_label_agreement = 0.0;
};

struct SpeakerAdaptation {
  AdaptReportRow row;
  ModelParams adapted;
};

// Adapts to each distinct speaker of `test` independently.
std::vector<SpeakerAdaptation> adapt_per_speaker(const ModelParams& params,
                                                 const FrameBatch& test,
                                                 const AdaptConfig& config,
                                                 double training_mu);

// Header: speaker,pre_accuracy,post_accuracy,pseudo_label_agreement
void write_adapt_report_csv(const std::vector<AdaptReportRow>& rows,
                            const std::filesystem::path& path);

}  // namespace sit

#endif  // SIT_ADAPTATION_HPP_
