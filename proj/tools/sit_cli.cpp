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
// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "sit/sit.h"

namespace {

enum ExitCode {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitDivergence = 4,
  kExitFormat = 5,
  kExitMismatch = 6,
};

int exit_code_for(sit_status s) {
  switch (s) {
    case SIT_OK: return kExitOk;
    case SIT_ERR_CONFIG: return kExitConfig;
    case SIT_ERR_IO: return kExitIo;
    case SIT_ERR_DIVERGENCE:
    case SIT_ERR_NUMERIC: return kExitDivergence;
    case SIT_ERR_MALFORMED_HEADER:
    case SIT_ERR_TRUNCATED:
    case SIT_ERR_CHECKSUM: return kExitFormat;
    case SIT_ERR_MISMATCH: return kExitMismatch;
    default: return kExitOther;
  }
}

struct Failure {
  sit_status status;
};

void check(sit_status s, const char* what) {
  if (s == SIT_OK) return;
  std::cerr << "sit: " << what << " failed (" << sit_status_name(s)
            << "): " << sit_last_error() << '\n';
  throw Failure{s};
}

struct ConfigDeleter {
  void operator()(sit_config* c) const { sit_config_free(c); }
};
struct CorpusDeleter {
  void operator()(sit_corpus* c) const { sit_corpus_free(c); }
};
struct ModelDeleter {
  void operator()(sit_model* m) const { sit_model_free(m); }
};
using ConfigPtr = std::unique_ptr<sit_config, ConfigDeleter>;
using CorpusPtr = std::unique_ptr<sit_corpus, CorpusDeleter>;
using ModelPtr = std::unique_ptr<sit_model, ModelDeleter>;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<std::uint32_t> n_h;
};

ConfigPtr load_config(const CommonOptions& o) {
  sit_config* raw = nullptr;
  if (o.config_path.empty()) {
    check(sit_config_default(&raw), "default config");
  } else {
    check(sit_config_load(o.config_path.c_str(), &raw), "loading config");
  }
  ConfigPtr c(raw);
  if (o.seed) check(sit_config_set_seed(c.get(), *o.seed), "--seed");
  if (o.lambda) check(sit_config_set_lambda(c.get(), *o.lambda), "--lambda");
  if (o.n_h) check(sit_config_set_n_h(c.get(), *o.n_h), "--n-h");
  return c;
}

std::string config_path_or(const sit_config* c, const char* key, const std::string& given,
                           const std::string& fallback_file) {
  if (!given.empty()) return given;
  const char* p = nullptr;
  check(sit_config_get_path(c, key, &p), "reading config paths");
  if (p && *p) return p;
  if (fallback_file.empty()) return {};
  const char* out_dir = nullptr;
  check(sit_config_get_path(c, "out_dir", &out_dir), "reading config paths");
  return (std::filesystem::path(out_dir) / fallback_file).string();
}

CorpusPtr load_corpus(const std::string& path) {
  sit_corpus* raw = nullptr;
  check(sit_corpus_load(path.c_str(), &raw), ("loading corpus " + path).c_str());
  return CorpusPtr(raw);
}

ModelPtr load_model(const std::string& path) {
  sit_model* raw = nullptr;
  check(sit_model_load(path.c_str(), &raw), ("loading checkpoint " + path).c_str());
  return ModelPtr(raw);
}

void print_corpus(const char* name, const sit_corpus* c) {
  sit_corpus_info info{};
  check(sit_corpus_get_info(c, &info), "corpus info");
  std::cout << name << ": " << info.n_frames << " frames x " << info.dim << " dims, "
            << info.n_senones << " senones, " << info.n_distinct_speakers << " speakers\n";
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Override every seed in the configuration");
}

void add_training_overrides(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--lambda", o.lambda, "Adversarial weight");
  cmd->add_option("--n-h", o.n_h, "Depth of the feature extractor");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker-invariant training pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sit_version()));

  CommonOptions gen_opts;
  std::string gen_out;
  bool gen_csv = false;
  auto* gen = app.add_subcommand("gen-data", "Generate train/test SITC corpora");
  add_common(gen, gen_opts);
  gen->add_option("--out", gen_out, "Output directory (default: paths.out_dir)");
  gen->add_flag("--csv", gen_csv, "Also export CSV copies for inspection");

  CommonOptions train_opts;
  std::string train_mode = "si", train_corpus, train_si, train_out, train_log;
  auto* train = app.add_subcommand("train", "Train an SI or SIT model");
  add_common(train, train_opts);
  add_training_overrides(train, train_opts);
  train->add_option("--mode", train_mode, "si or sit")
      ->check(CLI::IsMember({"si", "sit"}));
  train->add_option("--corpus", train_corpus, "Training corpus (default: paths.train_corpus)");
  train->add_option("--si-checkpoint", train_si,
                    "SI checkpoint to start SIT from, or to continue in --mode si");
  train->add_option("--out", train_out, "Output checkpoint")->required();
  train->add_option("--log", train_log, "Training log CSV (default: <out>.log.csv)");

  CommonOptions adapt_opts;
  std::string adapt_ckpt, adapt_corpus, adapt_out, adapt_prefix = "adapted", adapt_report;
  auto* adapt = app.add_subcommand("adapt", "Unsupervised per-speaker CRT adaptation");
  add_common(adapt, adapt_opts);
  adapt->add_option("--checkpoint", adapt_ckpt, "Model to adapt")->required();
  adapt->add_option("--corpus", adapt_corpus, "Test corpus (default: paths.test_corpus)");
  adapt->add_option("--out", adapt_out, "Output directory")->required();
  adapt->add_option("--prefix", adapt_prefix, "Checkpoint file prefix");
  adapt->add_option("--report", adapt_report, "Report CSV (default: <out>/<prefix>_report.csv)");

  CommonOptions eval_opts;
  std::string eval_ckpt, eval_corpus, eval_out;
  auto* eval = app.add_subcommand("eval", "Accuracy and invariance report");
  add_common(eval, eval_opts);
  eval->add_option("--checkpoint", eval_ckpt, "Model to evaluate")->required();
  eval->add_option("--corpus", eval_corpus, "Corpus (default: paths.test_corpus)");
  eval->add_option("--out", eval_out, "Report JSON")->required();

  CommonOptions proj_opts;
  std::string proj_ckpt, proj_corpus, proj_out, proj_method = "pca";
  auto* project = app.add_subcommand("project", "2-D projection of deep features");
  add_common(project, proj_opts);
  project->add_option("--checkpoint", proj_ckpt, "Model")->required();
  project->add_option("--corpus", proj_corpus, "Corpus (default: paths.train_corpus)");
  project->add_option("--method", proj_method, "pca or tsne")
      ->check(CLI::IsMember({"pca", "tsne"}));
  project->add_option("--out", proj_out, "Output CSV")->required();

  CommonOptions repro_opts;
  std::string repro_out;
  auto* repro = app.add_subcommand("repro", "Run the whole pipeline and print the comparison");
  add_common(repro, repro_opts);
  add_training_overrides(repro, repro_opts);
  repro->add_option("--out", repro_out, "Output directory (default: paths.out_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) {
      ConfigPtr cfg = load_config(gen_opts);
      const std::string dir = config_path_or(cfg.get(), "out_dir", gen_out, "");
      std::filesystem::create_directories(dir);
      sit_corpus* tr = nullptr;
      sit_corpus* te = nullptr;
      check(sit_corpus_generate(cfg.get(), &tr, &te), "generating corpora");
      CorpusPtr train_c(tr), test_c(te);
      const auto base = std::filesystem::path(dir);
      check(sit_corpus_save(train_c.get(), (base / "train.sitc").c_str()), "saving train corpus");
      check(sit_corpus_save(test_c.get(), (base / "test.sitc").c_str()), "saving test corpus");
      if (gen_csv) {
        check(sit_corpus_export_csv(train_c.get(), (base / "train.csv").c_str()), "CSV export");
        check(sit_corpus_export_csv(test_c.get(), (base / "test.csv").c_str()), "CSV export");
      }
      check(sit_config_write_manifest(cfg.get(), (base / "gen_manifest.json").c_str()),
            "writing manifest");
      print_corpus("train", train_c.get());
      print_corpus("test", test_c.get());
    } else if (*train) {
      ConfigPtr cfg = load_config(train_opts);
      const std::string corpus_path =
          config_path_or(cfg.get(), "train_corpus", train_corpus, "train.sitc");
      CorpusPtr corpus = load_corpus(corpus_path);
      ModelPtr si;
      const bool sit_mode = train_mode == "sit";
      if (sit_mode) {
        const std::string si_path = config_path_or(cfg.get(), "si_checkpoint", train_si, "");
        if (si_path.empty()) {
          std::cerr << "sit: --mode sit needs --si-checkpoint or paths.si_checkpoint\n";
          return kExitConfig;
        }
        si = load_model(si_path);
      } else if (!train_si.empty()) {
        si = load_model(train_si);
      }
      const std::string log_path = train_log.empty() ? train_out + ".log.csv" : train_log;
      sit_model* raw = nullptr;
      sit_train_summary summary{};
      check(sit_train(cfg.get(), sit_mode ? SIT_MODE_SIT : SIT_MODE_SI, corpus.get(),
                      si.get(), log_path.c_str(), train_out.c_str(), &raw, &summary),
            "training");
      ModelPtr model(raw);
      check(sit_model_save(model.get(), train_out.c_str()), "saving checkpoint");
      check(sit_config_write_manifest(cfg.get(), (train_out + ".manifest.json").c_str()),
            "writing manifest");
      std::printf("trained %s model: %u log rows, final training frame accuracy %.6f\n",
                  sit_mode ? "SIT" : "SI", summary.log_rows, summary.final_train_accuracy);
    } else if (*adapt) {
      ConfigPtr cfg = load_config(adapt_opts);
      CorpusPtr corpus =
          load_corpus(config_path_or(cfg.get(), "test_corpus", adapt_corpus, "test.sitc"));
      ModelPtr model = load_model(adapt_ckpt);
      std::filesystem::create_directories(adapt_out);
      const std::string report = adapt_report.empty()
          ? (std::filesystem::path(adapt_out) / (adapt_prefix + "_report.csv")).string()
          : adapt_report;
      sit_adapt_row rows[256];
      std::size_t count = 0;
      check(sit_adapt(cfg.get(), model.get(), corpus.get(), adapt_out.c_str(),
                      adapt_prefix.c_str(), report.c_str(), rows, 256, &count),
            "adaptation");
      for (std::size_t i = 0; i < count && i < 256; ++i)
        std::printf("speaker %u: %.4f -> %.4f (pseudo-label agreement %.4f)\n",
                    rows[i].speaker, rows[i].pre_accuracy, rows[i].post_accuracy,
                    rows[i].pseudo_label_agreement);
    } else if (*eval) {
      ConfigPtr cfg = load_config(eval_opts);
      CorpusPtr corpus =
          load_corpus(config_path_or(cfg.get(), "test_corpus", eval_corpus, "test.sitc"));
      ModelPtr model = load_model(eval_ckpt);
      sit_eval_summary s{};
      check(sit_evaluate(cfg.get(), model.get(), corpus.get(), eval_out.c_str(), &s),
            "evaluation");
      std::printf("frames %u  frame accuracy %.6f  speaker probe %.4f  invariance ratio %.4f\n",
                  s.n_frames, s.senone_frame_accuracy, s.speaker_probe_accuracy,
                  s.invariance_ratio);
    } else if (*project) {
      ConfigPtr cfg = load_config(proj_opts);
      CorpusPtr corpus =
          load_corpus(config_path_or(cfg.get(), "train_corpus", proj_corpus, "train.sitc"));
      ModelPtr model = load_model(proj_ckpt);
      std::uint64_t seed = 0;
      check(sit_config_get_eval_seed(cfg.get(), &seed), "project");
      check(sit_project(cfg.get(), model.get(), corpus.get(),
                        proj_method == "tsne" ? SIT_PROJECT_TSNE : SIT_PROJECT_PCA, seed,
                        proj_out.c_str()),
            "projection");
    } else if (*repro) {
      ConfigPtr cfg = load_config(repro_opts);
      const std::string dir = config_path_or(cfg.get(), "out_dir", repro_out, "");
      check(sit_repro(cfg.get(), dir.c_str()), "repro pipeline");
      std::ifstream table(std::filesystem::path(dir) / "comparison.md");
      std::cout << table.rdbuf();
    }
  } catch (const Failure& f) {
    return exit_code_for(f.status);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "sit: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
