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
#ifndef SIT_TRAINER_HPP_
#define SIT_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "sit/corpus.hpp"
#include "sit/model.hpp"
#include "sit/objectives.hpp"

namespace sit {

struct LogRow {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  LossBreakdown loss;
};

struct TrainLog {
  std::vector<LogRow> rows;
  // Running accuracies over each epoch's minibatches.
  std::vector<double> senone_accuracy;
  std::vector<double> speaker_accuracy;  // M_s accuracy, SIT only
  // Frame accuracy of the final model on the whole training corpus.
  double final_train_accuracy = 0.0;

  // Header: epoch,batch,senone_loss,speaker_loss,total_loss
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainOptions {
  // Adversarial weight per epoch; unset means the constant hyper.lambda.
  std::function<double(std::size_t epoch, double base)> lambda_schedule;
  // Invoked after each completed epoch (1-based) with the current parameters.
  std::function<void(std::size_t epoch, const ModelParams&)> on_epoch_end;
};

// Seeded per-epoch minibatch order. The same seed yields the same schedule for
// SI and SIT runs.
class BatchSchedule {
 public:
  BatchSchedule(std::size_t n_frames, std::size_t batch_size, std::uint64_t seed);

  // Row indices of each minibatch for the next epoch.
  std::vector<std::vector<std::size_t>> next_epoch();

 private:
  std::size_t n_;
  std::size_t batch_size_;
  std::mt19937_64 rng_;
};

// In-place theta <- theta - mu * grad over every layer of a stack.
void apply_sgd(Stack& stack, const StackGrad& grads, double mu);

// Minibatch SGD on the senone loss alone. `initial` must be a single-stack
// model; training resumes from its values.
ModelParams train_si(const FrameBatch& corpus, const ModelParams& initial,
                     const Hyperparams& hyper, TrainLog* log = nullptr,
                     const TrainOptions& options = {});

// One simultaneous update of all three groups, every gradient taken at the
// incoming parameters. Throws a divergence error if the result is unusable.
ModelParams sit_step(const Matrix& x, Labels senones, Labels speakers,
                     const ModelParams& params, const Hyperparams& hyper,
                     LossBreakdown* losses = nullptr, std::size_t batch_index = 0);

// Splits si_model at hyper.n_h, attaches a fresh speaker classifier and runs
// the adversarial loop over shuffled minibatches.
ModelParams train_sit(const ModelParams& si_model, const FrameBatch& corpus,
                      const Topology& topology, const Hyperparams& hyper,
                      TrainLog* log = nullptr, const TrainOptions& options = {});

// Seed used for the fresh speaker classifier of train_sit.
std::uint64_t speaker_init_seed(std::uint64_t seed);

inline constexpr double kDivergenceLimit = 1e6;

}  // namespace sit

#endif  // SIT_TRAINER_HPP_
