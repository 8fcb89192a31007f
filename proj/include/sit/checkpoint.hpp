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
#ifndef SIT_CHECKPOINT_HPP_
#define SIT_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sit/model.hpp"

namespace sit {

enum class ModelKind { kSi, kSit };

struct Checkpoint {
  ModelKind kind = ModelKind::kSi;
  ModelParams params;
  Hyperparams hyper;
  Topology topology;
  // Frame accuracy on the training corpus when the model was saved.
  std::optional<double> train_frame_accuracy;
};

// JSON document holding topology, every weight as a round-trip decimal, the
// hyperparameters, the vocabulary sizes and a CRC32 over the little-endian
// bytes of all weights and biases.
std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint32_t params_crc32(const ModelParams& params);

}  // namespace sit

#endif  // SIT_CHECKPOINT_HPP_
