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
#include "sit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "sit/error.hpp"
#include "sit/evaluation.hpp"

namespace sit {

void TrainLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  out << "epoch,batch,senone_loss,speaker_loss,total_loss\n";
  for (const LogRow& r : rows) {
    out << r.epoch << ',' << r.batch << ',' << r.loss.senone_loss << ','
        << r.loss.speaker_loss << ',' << r.loss.total_loss << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

BatchSchedule::BatchSchedule(std::size_t n_frames, std::size_t batch_size,
                             std::uint64_t seed)
    : n_(n_frames), batch_size_(batch_size), rng_(seed) {
  if (batch_size_ == 0) fail(ErrorCode::kArgument, "batch size must be >= 1");
}

std::vector<std::vector<std::size_t>> BatchSchedule::next_epoch() {
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng_);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n_; start += batch_size_) {
    const std::size_t end = std::min(n_, start + batch_size_);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

void apply_sgd(Stack& stack, const StackGrad& grads, double mu) {
  if (grads.size() != stack.size())
    fail(ErrorCode::kDimension, "gradient list does not match the stack depth");
  for (std::size_t l = 0; l < stack.size(); ++l) {
    stack[l].weights = sgd_step(stack[l].weights, grads[l].weights, mu);
    stack[l].bias = sgd_step(stack[l].bias, grads[l].bias, mu);
  }
}

namespace {

bool all_finite(const Stack& stack) {
  for (const DenseLayer& l : stack) {
    if (!l.weights.all_finite()) return false;
    for (double v : l.bias)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

void guard(const ModelParams& params, double total, std::size_t batch_index) {
  if (!std::isfinite(total) || std::abs(total) > kDivergenceLimit) {
    fail(ErrorCode::kDivergence, "total loss " + std::to_string(total) +
                                     " exceeds the divergence limit at batch " +
                                     std::to_string(batch_index));
  }
  if (!all_finite(params.feature) || !all_finite(params.senone) ||
      !all_finite(params.speaker)) {
    fail(ErrorCode::kDivergence,
         "non-finite parameter after batch " + std::to_string(batch_index));
  }
}

void require_corpus(const FrameBatch& corpus, const ModelParams& params) {
  if (corpus.size() == 0) fail(ErrorCode::kArgument, "training corpus is empty");
  validate(corpus);
  if (corpus.dim() != params.input_dim()) {
    fail(ErrorCode::kMismatch, "corpus frame width " + std::to_string(corpus.dim()) +
                                   " != model input width " +
                                   std::to_string(params.input_dim()));
  }
  if (corpus.n_senones != params.n_senones) {
    fail(ErrorCode::kMismatch, "corpus has " + std::to_string(corpus.n_senones) +
                                   " senones, model has " +
                                   std::to_string(params.n_senones));
  }
}

struct Minibatch {
  Matrix x;
  std::vector<std::uint32_t> senones;
  std::vector<std::uint32_t> speakers;
};

Minibatch gather(const FrameBatch& corpus, const std::vector<std::size_t>& rows) {
  Minibatch b;
  b.x = corpus.frames.gather_rows(rows);
  b.senones.reserve(rows.size());
  b.speakers.reserve(rows.size());
  for (std::size_t r : rows) {
    b.senones.push_back(corpus.senones[r]);
    b.speakers.push_back(corpus.speakers[r]);
  }
  return b;
}

}  // namespace

ModelParams train_si(const FrameBatch& corpus, const ModelParams& initial,
                     const Hyperparams& hyper, TrainLog* log,
                     const TrainOptions& options) {
  if (initial.is_split())
    fail(ErrorCode::kArgument, "train_si expects a single-stack model");
  validate(initial);
  require_corpus(corpus, initial);
  if (!(hyper.mu > 0.0)) fail(ErrorCode::kArgument, "mu must be > 0");

  ModelParams params = initial;
  BatchSchedule schedule(corpus.size(), hyper.batch_size, hyper.seed);
  std::size_t global_batch = 0;
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::size_t correct = 0;
    const auto batches = schedule.next_epoch();
    for (std::size_t b = 0; b < batches.size(); ++b, ++global_batch) {
      const Minibatch mb = gather(corpus, batches[b]);
      const SenoneGradients g =
          senone_gradients(mb.x, mb.senones, params, hyper.reduction);
      correct += g.correct;
      apply_sgd(params.senone, g.senone, hyper.mu);
      guard(params, g.loss, global_batch);
      if (log) log->rows.push_back({epoch, b, {g.loss, 0.0, g.loss, 0.0}});
    }
    if (log)
      log->senone_accuracy.push_back(static_cast<double>(correct) /
                                     static_cast<double>(corpus.size()));
    if (options.on_epoch_end) options.on_epoch_end(epoch, params);
  }
  if (log) log->final_train_accuracy = frame_accuracy(params, corpus);
  return params;
}

ModelParams sit_step(const Matrix& x, Labels senones, Labels speakers,
                     const ModelParams& params, const Hyperparams& hyper,
                     LossBreakdown* losses, std::size_t batch_index) {
  const SitGradients g =
      sit_gradients(x, senones, speakers, params, hyper.lambda, hyper.reduction);
  const double mu = hyper.adversarial_mu();
  ModelParams next = params;
  apply_sgd(next.feature, g.feature, mu);
  apply_sgd(next.senone, g.senone, mu);
  apply_sgd(next.speaker, g.speaker, mu);
  guard(next, g.losses.total_loss, batch_index);
  if (losses) *losses = g.losses;
  return next;
}

std::uint64_t speaker_init_seed(std::uint64_t seed) {
  return seed ^ 0x9e3779b97f4a7c15ULL;
}

ModelParams train_sit(const ModelParams& si_model, const FrameBatch& corpus,
                      const Topology& topology, const Hyperparams& hyper,
                      TrainLog* log, const TrainOptions& options) {
  validate(hyper, si_model.hidden_layer_count());
  validate(si_model);
  require_corpus(corpus, si_model);
  const auto speakers = corpus.distinct_speakers();
  const std::size_t n_speakers = speakers.empty() ? 0 : speakers.back() + 1;
  if (n_speakers < 2)
    fail(ErrorCode::kArgument, "adversarial training needs at least two speakers");

  ModelParams params = make_sit_model(si_model, hyper.n_h, topology, n_speakers,
                                      speaker_init_seed(hyper.seed));

  if (hyper.speaker_pretrain_epochs > 0) {
    BatchSchedule pre(corpus.size(), hyper.batch_size, speaker_init_seed(hyper.seed));
    for (std::size_t e = 0; e < hyper.speaker_pretrain_epochs; ++e) {
      for (const auto& rows : pre.next_epoch()) {
        const Minibatch mb = gather(corpus, rows);
        const SpeakerGradients g =
            speaker_gradients(mb.x, mb.speakers, params, hyper.reduction);
        apply_sgd(params.speaker, g.speaker, hyper.adversarial_mu());
      }
    }
  }

  BatchSchedule schedule(corpus.size(), hyper.batch_size, hyper.seed);
  Hyperparams step_hyper = hyper;
  std::size_t global_batch = 0;
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    step_hyper.lambda =
        options.lambda_schedule ? options.lambda_schedule(epoch, hyper.lambda) : hyper.lambda;
    std::size_t senone_correct = 0;
    std::size_t speaker_correct = 0;
    const auto batches = schedule.next_epoch();
    for (std::size_t b = 0; b < batches.size(); ++b, ++global_batch) {
      const Minibatch mb = gather(corpus, batches[b]);
      const SitGradients g = sit_gradients(mb.x, mb.senones, mb.speakers, params,
                                           step_hyper.lambda, hyper.reduction);
      const double mu = hyper.adversarial_mu();
      apply_sgd(params.feature, g.feature, mu);
      apply_sgd(params.senone, g.senone, mu);
      apply_sgd(params.speaker, g.speaker, mu);
      guard(params, g.losses.total_loss, global_batch);
      senone_correct += g.senone_correct;
      speaker_correct += g.speaker_correct;
      if (log) log->rows.push_back({epoch, b, g.losses});
    }
    if (log) {
      const auto n = static_cast<double>(corpus.size());
      log->senone_accuracy.push_back(static_cast<double>(senone_correct) / n);
      log->speaker_accuracy.push_back(static_cast<double>(speaker_correct) / n);
    }
    if (options.on_epoch_end) options.on_epoch_end(epoch, params);
  }
  if (log) log->final_train_accuracy = frame_accuracy(params, corpus);
  return params;
}

}  // namespace sit
