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
#ifndef SIT_CONFIG_HPP_
#define SIT_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "sit/adaptation.hpp"
#include "sit/corpus.hpp"
#include "sit/evaluation.hpp"
#include "sit/model.hpp"

namespace sit {

struct EvalConfig {
  ProbeConfig probe;
  TsneOptions tsne;
  // Projections use the frames of this senone from the first
  // projection_speakers speakers of the corpus.
  std::uint32_t projection_senone = 0;
  std::size_t projection_speakers = 4;
  std::uint64_t seed = 5;
};

struct PathsConfig {
  std::string out_dir = "out";
  std::string train_corpus;
  std::string test_corpus;
  std::string si_checkpoint;
  // Save an intermediate checkpoint every this many epochs; 0 disables.
  std::size_t checkpoint_interval = 0;
};

struct RunConfig {
  SyntheticCorpusSpec corpus;
  Topology topology;
  Hyperparams hyper;
  AdaptConfig adapt;
  EvalConfig eval;
  PathsConfig paths;
};

// Throws ErrorCode::kConfig naming the offending field.
void validate(const RunConfig& config);

// Strict JSON: unknown keys are rejected, omitted keys take defaults.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

// Every field with defaults materialized.
std::string config_json(const RunConfig& config);

// Sets the corpus, training, adaptation and evaluation seeds to `seed`.
void override_seed(RunConfig& config, std::uint64_t seed);

}  // namespace sit

#endif  // SIT_CONFIG_HPP_
