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
#include "sit/sit.h"

#include <cstring>
#include <fstream>
#include <filesystem>
#include <memory>
#include <string>

#include "sit/error.hpp"
#include "sit/pipeline.hpp"

struct sit_config {
  sit::RunConfig value;
};

struct sit_corpus {
  sit::FrameBatch value;
};

struct sit_model {
  sit::Checkpoint value;
};

namespace {

thread_local std::string last_error;

sit_status to_status(sit::ErrorCode code) {
  using sit::ErrorCode;
  switch (code) {
    case ErrorCode::kArgument: return SIT_ERR_ARGUMENT;
    case ErrorCode::kDimension: return SIT_ERR_DIMENSION;
    case ErrorCode::kNumeric: return SIT_ERR_NUMERIC;
    case ErrorCode::kDivergence: return SIT_ERR_DIVERGENCE;
    case ErrorCode::kConfig: return SIT_ERR_CONFIG;
    case ErrorCode::kIo: return SIT_ERR_IO;
    case ErrorCode::kMalformedHeader: return SIT_ERR_MALFORMED_HEADER;
    case ErrorCode::kTruncated: return SIT_ERR_TRUNCATED;
    case ErrorCode::kChecksumMismatch: return SIT_ERR_CHECKSUM;
    case ErrorCode::kMismatch: return SIT_ERR_MISMATCH;
  }
  return SIT_ERR_INTERNAL;
}

template <typename Fn>
sit_status guarded(Fn&& fn) {
  try {
    fn();
    return SIT_OK;
  } catch (const sit::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return SIT_ERR_IO;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SIT_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return SIT_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (!p) sit::fail(sit::ErrorCode::kArgument, std::string(name) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* sit_version(void) { return "1.0.0"; }

const char* sit_last_error(void) { return last_error.c_str(); }

const char* sit_status_name(sit_status status) {
  switch (status) {
    case SIT_OK: return "ok";
    case SIT_ERR_ARGUMENT: return "argument";
    case SIT_ERR_DIMENSION: return "dimension";
    case SIT_ERR_NUMERIC: return "numeric";
    case SIT_ERR_DIVERGENCE: return "divergence";
    case SIT_ERR_CONFIG: return "config";
    case SIT_ERR_IO: return "io";
    case SIT_ERR_MALFORMED_HEADER: return "malformed-header";
    case SIT_ERR_TRUNCATED: return "truncated";
    case SIT_ERR_CHECKSUM: return "checksum-mismatch";
    case SIT_ERR_MISMATCH: return "mismatch";
    case SIT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

sit_status sit_config_default(sit_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new sit_config{};
  });
}

sit_status sit_config_load(const char* path, sit_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto c = std::make_unique<sit_config>();
    c->value = sit::load_config(path);
    *out = c.release();
  });
}

sit_status sit_config_parse(const char* json_text, sit_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    auto c = std::make_unique<sit_config>();
    c->value = sit::parse_config(json_text);
    *out = c.release();
  });
}

sit_status sit_config_set_seed(sit_config* config, uint64_t seed) {
  return guarded([&] {
    require(config, "config");
    sit::override_seed(config->value, seed);
  });
}

sit_status sit_config_set_lambda(sit_config* config, double lambda) {
  return guarded([&] {
    require(config, "config");
    sit::RunConfig next = config->value;
    next.hyper.lambda = lambda;
    sit::validate(next);
    config->value = std::move(next);
  });
}

sit_status sit_config_set_n_h(sit_config* config, uint32_t n_h) {
  return guarded([&] {
    require(config, "config");
    sit::RunConfig next = config->value;
    next.hyper.n_h = n_h;
    sit::validate(next);
    config->value = std::move(next);
  });
}

sit_status sit_config_write_manifest(const sit_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    std::ofstream out(path, std::ios::trunc);
    if (!out) sit::fail(sit::ErrorCode::kIo, std::string("cannot open ") + path);
    out << sit::config_json(config->value) << '\n';
    if (!out) sit::fail(sit::ErrorCode::kIo, std::string("write failed for ") + path);
  });
}

sit_status sit_config_get_eval_seed(const sit_config* config, uint64_t* out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = config->value.eval.seed;
  });
}

sit_status sit_config_get_path(const sit_config* config, const char* key,
                               const char** out) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(out, "out");
    const sit::PathsConfig& p = config->value.paths;
    const std::string k = key;
    if (k == "out_dir") {
      *out = p.out_dir.c_str();
    } else if (k == "train_corpus") {
      *out = p.train_corpus.c_str();
    } else if (k == "test_corpus") {
      *out = p.test_corpus.c_str();
    } else if (k == "si_checkpoint") {
      *out = p.si_checkpoint.c_str();
    } else {
      sit::fail(sit::ErrorCode::kArgument, "unknown path key '" + k + "'");
    }
  });
}

void sit_config_free(sit_config* config) { delete config; }

sit_status sit_corpus_generate(const sit_config* config, sit_corpus** train,
                               sit_corpus** test) {
  return guarded([&] {
    require(config, "config");
    require(train, "train");
    require(test, "test");
    sit::validate(config->value);
    sit::CorpusPair pair = sit::build_corpora(config->value.corpus);
    auto tr = std::make_unique<sit_corpus>(sit_corpus{std::move(pair.train)});
    auto te = std::make_unique<sit_corpus>(sit_corpus{std::move(pair.test)});
    *train = tr.release();
    *test = te.release();
  });
}

sit_status sit_corpus_load(const char* path, sit_corpus** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto c = std::make_unique<sit_corpus>(sit_corpus{sit::load_corpus(path)});
    *out = c.release();
  });
}

sit_status sit_corpus_save(const sit_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus, "corpus");
    require(path, "path");
    sit::save_corpus(corpus->value, path);
  });
}

sit_status sit_corpus_export_csv(const sit_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus, "corpus");
    require(path, "path");
    sit::export_corpus_csv(corpus->value, path);
  });
}

sit_status sit_corpus_get_info(const sit_corpus* corpus, sit_corpus_info* out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(out, "out");
    const sit::FrameBatch& b = corpus->value;
    out->n_frames = static_cast<uint32_t>(b.size());
    out->dim = static_cast<uint32_t>(b.dim());
    out->n_senones = b.n_senones;
    out->n_speakers = b.n_speakers;
    out->n_distinct_speakers = static_cast<uint32_t>(b.distinct_speakers().size());
  });
}

void sit_corpus_free(sit_corpus* corpus) { delete corpus; }

sit_status sit_model_load(const char* path, sit_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto m = std::make_unique<sit_model>(sit_model{sit::load_checkpoint(path)});
    *out = m.release();
  });
}

sit_status sit_model_save(const sit_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    sit::save_checkpoint(model->value, path);
  });
}

sit_status sit_model_get_info(const sit_model* model, sit_model_info* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const sit::Checkpoint& c = model->value;
    out->is_sit = c.kind == sit::ModelKind::kSit ? 1 : 0;
    out->input_dim = static_cast<uint32_t>(c.params.input_dim());
    out->n_senones = static_cast<uint32_t>(c.params.n_senones);
    out->n_speakers = static_cast<uint32_t>(c.params.n_speakers);
    out->n_h = static_cast<uint32_t>(c.params.is_split() ? c.params.feature.size()
                                                         : c.hyper.n_h);
    out->has_train_accuracy = c.train_frame_accuracy ? 1 : 0;
    out->train_accuracy = c.train_frame_accuracy.value_or(0.0);
  });
}

void sit_model_free(sit_model* model) { delete model; }

sit_status sit_train(const sit_config* config, sit_train_mode mode,
                     const sit_corpus* train, const sit_model* si_model,
                     const char* log_csv, const char* checkpoint_prefix,
                     sit_model** out, sit_train_summary* summary) {
  return guarded([&] {
    require(config, "config");
    require(train, "train");
    require(out, "out");
    const std::filesystem::path prefix =
        checkpoint_prefix ? std::filesystem::path(checkpoint_prefix) : std::filesystem::path();
    sit::TrainResult r;
    if (mode == SIT_MODE_SI) {
      r = sit::run_train_si(config->value, train->value, prefix,
                            si_model ? &si_model->value : nullptr);
    } else if (mode == SIT_MODE_SIT) {
      if (!si_model)
        sit::fail(sit::ErrorCode::kArgument, "SIT training requires an SI checkpoint");
      r = sit::run_train_sit(config->value, si_model->value, train->value, prefix);
    } else {
      sit::fail(sit::ErrorCode::kArgument, "unknown training mode");
    }
    if (log_csv) r.log.write_csv(log_csv);
    if (summary) {
      summary->log_rows = static_cast<uint32_t>(r.log.rows.size());
      summary->final_train_accuracy = r.log.final_train_accuracy;
      summary->final_senone_loss = r.log.rows.empty() ? 0.0 : r.log.rows.back().loss.senone_loss;
      summary->final_speaker_loss =
          r.log.rows.empty() ? 0.0 : r.log.rows.back().loss.speaker_loss;
    }
    *out = new sit_model{std::move(r.checkpoint)};
  });
}

sit_status sit_adapt(const sit_config* config, const sit_model* model,
                     const sit_corpus* test, const char* out_dir, const char* prefix,
                     const char* report_csv, sit_adapt_row* rows, size_t capacity,
                     size_t* count) {
  return guarded([&] {
    require(config, "config");
    require(model, "model");
    require(test, "test");
    require(out_dir, "out_dir");
    require(prefix, "prefix");
    const auto report =
        sit::run_adapt(config->value, model->value, test->value, out_dir, prefix);
    if (report_csv) sit::write_adapt_report_csv(report, report_csv);
    if (count) *count = report.size();
    for (std::size_t i = 0; rows && i < report.size() && i < capacity; ++i) {
      rows[i] = {report[i].speaker, report[i].pre_accuracy, report[i].post_accuracy,
                 report[i].pseudo_label_agreement};
    }
  });
}

sit_status sit_evaluate(const sit_config* config, const sit_model* model,
                        const sit_corpus* corpus, const char* report_json,
                        sit_eval_summary* summary) {
  return guarded([&] {
    require(config, "config");
    require(model, "model");
    require(corpus, "corpus");
    const sit::EvalReport r = sit::run_eval(config->value, model->value, corpus->value);
    if (report_json) sit::write_report_json(r, report_json);
    if (summary) {
      summary->n_frames = static_cast<uint32_t>(r.n_frames);
      summary->senone_frame_accuracy = r.senone_frame_accuracy;
      summary->speaker_probe_accuracy = r.speaker_probe_accuracy;
      summary->invariance_ratio = r.invariance_ratio;
    }
  });
}

sit_status sit_project(const sit_config* config, const sit_model* model,
                       const sit_corpus* corpus, sit_projection method, uint64_t seed,
                       const char* out_csv) {
  return guarded([&] {
    require(config, "config");
    require(model, "model");
    require(corpus, "corpus");
    require(out_csv, "out_csv");
    sit::ProjectionMethod m;
    if (method == SIT_PROJECT_PCA) {
      m = sit::ProjectionMethod::kPca;
    } else if (method == SIT_PROJECT_TSNE) {
      m = sit::ProjectionMethod::kTsne;
    } else {
      sit::fail(sit::ErrorCode::kArgument, "unknown projection method");
    }
    const sit::Projection p =
        sit::run_project(config->value, model->value, corpus->value, m, seed);
    sit::write_projection_csv(p.coords, p.senones, p.speakers, out_csv);
  });
}

sit_status sit_repro(const sit_config* config, const char* out_dir) {
  return guarded([&] {
    require(config, "config");
    require(out_dir, "out_dir");
    sit::run_repro(config->value, out_dir);
  });
}

}  // extern "C"
