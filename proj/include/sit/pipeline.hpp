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
#ifndef SIT_PIPELINE_HPP_
#define SIT_PIPELINE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "sit/adaptation.hpp"
#include "sit/checkpoint.hpp"
#include "sit/config.hpp"
#include "sit/corpus.hpp"
#include "sit/evaluation.hpp"
#include "sit/trainer.hpp"

namespace sit {

// Reads SIT_LOG_LEVEL (error, info, debug) once; defaults to info.
void init_logging();

std::string corpus_summary(const FrameBatch& batch, const char* name);

struct TrainResult {
  Checkpoint checkpoint;
  TrainLog log;
};

// `checkpoint_prefix`, when non-empty, receives <prefix>.epoch<N>.json every
// config.paths.checkpoint_interval epochs. run_train_si starts from a fresh
// seeded model, or continues from `resume` when given.
TrainResult run_train_si(const RunConfig& config, const FrameBatch& train,
                         const std::filesystem::path& checkpoint_prefix = {},
                         const Checkpoint* resume = nullptr);
TrainResult run_train_sit(const RunConfig& config, const Checkpoint& si,
                          const FrameBatch& train,
                          const std::filesystem::path& checkpoint_prefix = {});

// Checks that a corpus fits a checkpoint's input width and senone vocabulary.
void require_compatible(const Checkpoint& checkpoint, const FrameBatch& batch);

// Writes <out_dir>/<prefix>_spk<id>.json per test speaker and returns the
// report rows.
std::vector<AdaptReportRow> run_adapt(const RunConfig& config, const Checkpoint& checkpoint,
                                      const FrameBatch& test,
                                      const std::filesystem::path& out_dir,
                                      const std::string& prefix);

EvalReport run_eval(const RunConfig& config, const Checkpoint& checkpoint,
                    const FrameBatch& batch);

// Frames of config.eval.projection_senone from the first
// config.eval.projection_speakers speakers present in the corpus.
FrameBatch projection_frames(const RunConfig& config, const FrameBatch& batch);

struct Projection {
  Matrix coords;
  std::vector<std::uint32_t> senones;
  std::vector<std::uint32_t> speakers;
};

Projection run_project(const RunConfig& config, const Checkpoint& checkpoint,
                       const FrameBatch& batch, ProjectionMethod method,
                       std::uint64_t seed);

// gen-data -> train si -> train sit -> adapt -> eval -> project, all under
// out_dir. Returns the comparison table (also written to comparison.md).
std::string run_repro(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace sit

#endif  // SIT_PIPELINE_HPP_
