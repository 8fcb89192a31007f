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
#include "sit/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include "sit/error.hpp"

namespace sit {

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    const char* env = std::getenv("SIT_LOG_LEVEL");
    const std::string level = env ? env : "info";
    if (level == "error") {
      spdlog::set_level(spdlog::level::err);
    } else if (level == "debug") {
      spdlog::set_level(spdlog::level::debug);
    } else {
      spdlog::set_level(spdlog::level::info);
    }
  });
}

std::string corpus_summary(const FrameBatch& batch, const char* name) {
  std::ostringstream os;
  os << name << ": " << batch.size() << " frames x " << batch.dim() << " dims, "
     << batch.n_senones << " senones, " << batch.distinct_speakers().size()
     << " speakers";
  return os.str();
}

namespace {

TrainOptions epoch_hooks(const RunConfig& config, ModelKind kind,
                         const std::filesystem::path& prefix, TrainLog* log) {
  TrainOptions options;
  options.on_epoch_end = [&config, kind, prefix, log](std::size_t epoch,
                                                      const ModelParams& params) {
    if (log && !log->senone_accuracy.empty()) {
      if (!log->speaker_accuracy.empty()) {
        spdlog::debug("epoch {}: senone acc {:.4f}, speaker acc {:.4f}", epoch,
                      log->senone_accuracy.back(), log->speaker_accuracy.back());
      } else {
        spdlog::debug("epoch {}: senone acc {:.4f}", epoch, log->senone_accuracy.back());
      }
    }
    const std::size_t every = config.paths.checkpoint_interval;
    if (every > 0 && !prefix.empty() && epoch % every == 0) {
      Checkpoint c{kind, params, config.hyper, config.topology, std::nullopt};
      auto path = prefix;
      path += ".epoch" + std::to_string(epoch) + ".json";
      save_checkpoint(c, path);
    }
  };
  return options;
}

}  // namespace

TrainResult run_train_si(const RunConfig& config, const FrameBatch& train,
                         const std::filesystem::path& checkpoint_prefix,
                         const Checkpoint* resume) {
  init_logging();
  validate(config);
  TrainResult r;
  ModelParams init;
  if (resume) {
    if (resume->kind != ModelKind::kSi)
      fail(ErrorCode::kArgument, "SI training can only continue from an SI checkpoint");
    require_compatible(*resume, train);
    init = resume->params;
  } else {
    init = init_si_model(train.dim(), config.topology, train.n_senones, config.hyper.seed);
  }
  spdlog::info("training SI model: {} frames, {} epochs", train.size(), config.hyper.epochs);
  r.checkpoint.params = train_si(train, init, config.hyper, &r.log,
                                 epoch_hooks(config, ModelKind::kSi, checkpoint_prefix, &r.log));
  r.checkpoint.kind = ModelKind::kSi;
  r.checkpoint.hyper = config.hyper;
  r.checkpoint.topology = config.topology;
  r.checkpoint.train_frame_accuracy = r.log.final_train_accuracy;
  spdlog::info("SI training accuracy {:.4f}", r.log.final_train_accuracy);
  return r;
}

TrainResult run_train_sit(const RunConfig& config, const Checkpoint& si,
                          const FrameBatch& train,
                          const std::filesystem::path& checkpoint_prefix) {
  init_logging();
  validate(config);
  if (si.kind != ModelKind::kSi)
    fail(ErrorCode::kArgument, "adversarial training starts from an SI checkpoint");
  require_compatible(si, train);
  TrainResult r;
  spdlog::info("training SIT model: lambda {}, n_h {}, {} epochs", config.hyper.lambda,
               config.hyper.n_h, config.hyper.epochs);
  r.checkpoint.params =
      train_sit(si.params, train, config.topology, config.hyper, &r.log,
                epoch_hooks(config, ModelKind::kSit, checkpoint_prefix, &r.log));
  r.checkpoint.kind = ModelKind::kSit;
  r.checkpoint.hyper = config.hyper;
  r.checkpoint.topology = config.topology;
  r.checkpoint.train_frame_accuracy = r.log.final_train_accuracy;
  spdlog::info("SIT training accuracy {:.4f}", r.log.final_train_accuracy);
  return r;
}

void require_compatible(const Checkpoint& checkpoint, const FrameBatch& batch) {
  if (batch.dim() != checkpoint.params.input_dim()) {
    fail(ErrorCode::kMismatch, "corpus frames have " + std::to_string(batch.dim()) +
                                   " dims but the checkpoint expects " +
                                   std::to_string(checkpoint.params.input_dim()));
  }
  if (batch.n_senones != checkpoint.params.n_senones) {
    fail(ErrorCode::kMismatch, "corpus has " + std::to_string(batch.n_senones) +
                                   " senones but the checkpoint predicts " +
                                   std::to_string(checkpoint.params.n_senones));
  }
}

std::vector<AdaptReportRow> run_adapt(const RunConfig& config, const Checkpoint& checkpoint,
                                      const FrameBatch& test,
                                      const std::filesystem::path& out_dir,
                                      const std::string& prefix) {
  init_logging();
  require_compatible(checkpoint, test);
  std::filesystem::create_directories(out_dir);
  const auto results =
      adapt_per_speaker(checkpoint.params, test, config.adapt, checkpoint.hyper.mu);
  std::vector<AdaptReportRow> rows;
  for (const auto& r : results) {
    Checkpoint adapted = checkpoint;
    adapted.params = r.adapted;
    adapted.train_frame_accuracy.reset();
    save_checkpoint(adapted,
                    out_dir / (prefix + "_spk" + std::to_string(r.row.speaker) + ".json"));
    spdlog::info("speaker {}: {:.4f} -> {:.4f} (pseudo-label agreement {:.4f})",
                 r.row.speaker, r.row.pre_accuracy, r.row.post_accuracy,
                 r.row.pseudo_label_agreement);
    rows.push_back(r.row);
  }
  return rows;
}

EvalReport run_eval(const RunConfig& config, const Checkpoint& checkpoint,
                    const FrameBatch& batch) {
  init_logging();
  require_compatible(checkpoint, batch);
  const std::size_t n_h = checkpoint.params.is_split() ? checkpoint.params.feature.size()
                                                       : checkpoint.hyper.n_h;
  return evaluate(checkpoint.params, batch, n_h, config.eval.probe, config.eval.seed);
}

FrameBatch projection_frames(const RunConfig& config, const FrameBatch& batch) {
  auto speakers = batch.distinct_speakers();
  if (speakers.size() > config.eval.projection_speakers)
    speakers.resize(config.eval.projection_speakers);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.senones[i] != config.eval.projection_senone) continue;
    if (std::find(speakers.begin(), speakers.end(), batch.speakers[i]) != speakers.end())
      rows.push_back(i);
  }
  return batch.select(rows);
}

Projection run_project(const RunConfig& config, const Checkpoint& checkpoint,
                       const FrameBatch& batch, ProjectionMethod method,
                       std::uint64_t seed) {
  init_logging();
  require_compatible(checkpoint, batch);
  const FrameBatch frames = projection_frames(config, batch);
  const std::size_t n_h = checkpoint.params.is_split() ? checkpoint.params.feature.size()
                                                       : checkpoint.hyper.n_h;
  const Matrix features = deep_features(checkpoint.params, frames.frames, n_h);
  return {project_2d(features, method, seed, config.eval.tsne), frames.senones,
          frames.speakers};
}

namespace {

double weighted_accuracy(const std::vector<AdaptReportRow>& rows,
                         const FrameBatch& test, bool post) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    const std::size_t count = static_cast<std::size_t>(
        std::count(test.speakers.begin(), test.speakers.end(), r.speaker));
    sum += (post ? r.post_accuracy : r.pre_accuracy) * static_cast<double>(count);
    n += count;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

std::string pct(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << 100.0 * v;
  return os.str();
}

}  // namespace

std::string run_repro(const RunConfig& config, const std::filesystem::path& out_dir) {
  init_logging();
  validate(config);
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "config.json", config_json(config) + "\n");

  const CorpusPair corpora = build_corpora(config.corpus);
  save_corpus(corpora.train, out_dir / "train.sitc");
  save_corpus(corpora.test, out_dir / "test.sitc");
  spdlog::info("{}", corpus_summary(corpora.train, "train"));
  spdlog::info("{}", corpus_summary(corpora.test, "test"));

  const TrainResult si = run_train_si(config, corpora.train);
  save_checkpoint(si.checkpoint, out_dir / "si.json");
  si.log.write_csv(out_dir / "si_log.csv");

  const TrainResult sit = run_train_sit(config, si.checkpoint, corpora.train);
  save_checkpoint(sit.checkpoint, out_dir / "sit.json");
  sit.log.write_csv(out_dir / "sit_log.csv");

  const auto sa_si = run_adapt(config, si.checkpoint, corpora.test, out_dir, "sa_si");
  write_adapt_report_csv(sa_si, out_dir / "adapt_si.csv");
  const auto sa_sit = run_adapt(config, sit.checkpoint, corpora.test, out_dir, "sa_sit");
  write_adapt_report_csv(sa_sit, out_dir / "adapt_sit.csv");

  const EvalReport si_train = run_eval(config, si.checkpoint, corpora.train);
  const EvalReport sit_train = run_eval(config, sit.checkpoint, corpora.train);
  const EvalReport si_test = run_eval(config, si.checkpoint, corpora.test);
  const EvalReport sit_test = run_eval(config, sit.checkpoint, corpora.test);
  write_report_json(si_train, out_dir / "eval_si_train.json");
  write_report_json(sit_train, out_dir / "eval_sit_train.json");
  write_report_json(si_test, out_dir / "eval_si_test.json");
  write_report_json(sit_test, out_dir / "eval_sit_test.json");

  for (const auto& [name, ckpt] :
       {std::pair<const char*, const Checkpoint*>{"si", &si.checkpoint},
        {"sit", &sit.checkpoint}}) {
    for (const auto method : {ProjectionMethod::kPca, ProjectionMethod::kTsne}) {
      const Projection p = run_project(config, *ckpt, corpora.train, method, config.eval.seed);
      const std::string file = std::string("proj_") + name + "_" +
                               (method == ProjectionMethod::kPca ? "pca" : "tsne") + ".csv";
      write_projection_csv(p.coords, p.senones, p.speakers, out_dir / file);
    }
  }

  std::ostringstream t;
  t << "Frame accuracy (%) on held-out speakers; frame accuracy stands in for WER.\n\n";
  t << "| System |";
  for (const auto& r : sa_si) t << " spk" << r.speaker << " |";
  t << " Avg. |\n|---|";
  for (std::size_t i = 0; i < sa_si.size(); ++i) t << "---|";
  t << "---|\n";
  auto row = [&](const char* name, const std::vector<AdaptReportRow>& rows, bool post) {
    t << "| " << name << " |";
    for (const auto& r : rows) t << ' ' << pct(post ? r.post_accuracy : r.pre_accuracy) << " |";
    t << ' ' << pct(weighted_accuracy(rows, corpora.test, post)) << " |\n";
  };
  row("SI", sa_si, false);
  row("SIT", sa_sit, false);
  row("SA-SI", sa_si, true);
  row("SA-SIT", sa_sit, true);
  t << "\nDeep-feature speaker invariance on training speakers.\n\n";
  t << "| System | train acc. (%) | speaker probe acc. (%) | invariance ratio |\n";
  t << "|---|---|---|---|\n";
  t << "| SI | " << pct(si_train.senone_frame_accuracy) << " | "
    << pct(si_train.speaker_probe_accuracy) << " | " << si_train.invariance_ratio << " |\n";
  t << "| SIT | " << pct(sit_train.senone_frame_accuracy) << " | "
    << pct(sit_train.speaker_probe_accuracy) << " | " << sit_train.invariance_ratio << " |\n";
  const std::string table = t.str();
  write_text(out_dir / "comparison.md", table);
  return table;
}

}  // namespace sit
