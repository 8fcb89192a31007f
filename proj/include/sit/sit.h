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
/* C interface to the speaker-invariant training library.
 *
 * Objects are opaque handles created by sit_*_create/load/generate functions
 * and released with the matching sit_*_free. Every fallible call returns a
 * sit_status; on failure sit_last_error() describes the problem for the
 * calling thread until its next failing call. */
#ifndef SIT_SIT_H_
#define SIT_SIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SIT_BUILDING_LIBRARY)
#    define SIT_API __declspec(dllexport)
#  else
#    define SIT_API __declspec(dllimport)
#  endif
#else
#  define SIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sit_status {
  SIT_OK = 0,
  SIT_ERR_ARGUMENT = 1,
  SIT_ERR_DIMENSION = 2,
  SIT_ERR_NUMERIC = 3,
  SIT_ERR_DIVERGENCE = 4,
  SIT_ERR_CONFIG = 5,
  SIT_ERR_IO = 6,
  SIT_ERR_MALFORMED_HEADER = 7,
  SIT_ERR_TRUNCATED = 8,
  SIT_ERR_CHECKSUM = 9,
  SIT_ERR_MISMATCH = 10,
  SIT_ERR_INTERNAL = 11
} sit_status;

typedef enum sit_train_mode { SIT_MODE_SI = 0, SIT_MODE_SIT = 1 } sit_train_mode;
typedef enum sit_projection { SIT_PROJECT_PCA = 0, SIT_PROJECT_TSNE = 1 } sit_projection;

typedef struct sit_config sit_config;
typedef struct sit_corpus sit_corpus;
typedef struct sit_model sit_model;

typedef struct sit_corpus_info {
  uint32_t n_frames;
  uint32_t dim;
  uint32_t n_senones;
  uint32_t n_speakers; /* speaker-id vocabulary size */
  uint32_t n_distinct_speakers;
} sit_corpus_info;

typedef struct sit_model_info {
  int is_sit; /* 1 for an adversarially trained model */
  uint32_t input_dim;
  uint32_t n_senones;
  uint32_t n_speakers;
  uint32_t n_h;
  int has_train_accuracy;
  double train_accuracy;
} sit_model_info;

typedef struct sit_train_summary {
  uint32_t log_rows;
  double final_train_accuracy;
  double final_senone_loss;
  double final_speaker_loss;
} sit_train_summary;

typedef struct sit_adapt_row {
  uint32_t speaker;
  double pre_accuracy;
  double post_accuracy;
  double pseudo_label_agreement;
} sit_adapt_row;

typedef struct sit_eval_summary {
  uint32_t n_frames;
  double senone_frame_accuracy;
  double speaker_probe_accuracy;
  double invariance_ratio;
} sit_eval_summary;

SIT_API const char* sit_version(void);
SIT_API const char* sit_last_error(void);
SIT_API const char* sit_status_name(sit_status status);

/* Configuration. */
SIT_API sit_status sit_config_default(sit_config** out);
SIT_API sit_status sit_config_load(const char* path, sit_config** out);
SIT_API sit_status sit_config_parse(const char* json_text, sit_config** out);
SIT_API sit_status sit_config_set_seed(sit_config* config, uint64_t seed);
SIT_API sit_status sit_config_set_lambda(sit_config* config, double lambda);
SIT_API sit_status sit_config_set_n_h(sit_config* config, uint32_t n_h);
/* Writes the configuration with every default materialized. */
SIT_API sit_status sit_config_write_manifest(const sit_config* config, const char* path);
/* Reads a path from the config's "paths" section: "out_dir", "train_corpus",
 * "test_corpus" or "si_checkpoint". The string lives as long as the config. */
SIT_API sit_status sit_config_get_path(const sit_config* config, const char* key,
                                       const char** out);
/* Seed used by evaluation and projections (eval.seed). */
SIT_API sit_status sit_config_get_eval_seed(const sit_config* config, uint64_t* out);
SIT_API void sit_config_free(sit_config* config);

/* Corpora. */
SIT_API sit_status sit_corpus_generate(const sit_config* config, sit_corpus** train,
                                       sit_corpus** test);
SIT_API sit_status sit_corpus_load(const char* path, sit_corpus** out);
SIT_API sit_status sit_corpus_save(const sit_corpus* corpus, const char* path);
SIT_API sit_status sit_corpus_export_csv(const sit_corpus* corpus, const char* path);
SIT_API sit_status sit_corpus_get_info(const sit_corpus* corpus, sit_corpus_info* out);
SIT_API void sit_corpus_free(sit_corpus* corpus);

/* Models. */
SIT_API sit_status sit_model_load(const char* path, sit_model** out);
SIT_API sit_status sit_model_save(const sit_model* model, const char* path);
SIT_API sit_status sit_model_get_info(const sit_model* model, sit_model_info* out);
SIT_API void sit_model_free(sit_model* model);

/* Trains an SI model, continuing from si_model when it is non-NULL, or an SIT
 * model starting from the SI model. log_csv and checkpoint_prefix may be NULL. summary may be NULL. */
SIT_API sit_status sit_train(const sit_config* config, sit_train_mode mode,
                             const sit_corpus* train, const sit_model* si_model,
                             const char* log_csv, const char* checkpoint_prefix,
                             sit_model** out, sit_train_summary* summary);

/* Adapts the model to every speaker of `test`, writing
 * <out_dir>/<prefix>_spk<id>.json and, if report_csv is non-NULL, the report.
 * Up to `capacity` rows are copied to `rows`; *count receives the total. */
SIT_API sit_status sit_adapt(const sit_config* config, const sit_model* model,
                             const sit_corpus* test, const char* out_dir,
                             const char* prefix, const char* report_csv,
                             sit_adapt_row* rows, size_t capacity, size_t* count);

/* report_json and summary may be NULL. */
SIT_API sit_status sit_evaluate(const sit_config* config, const sit_model* model,
                                const sit_corpus* corpus, const char* report_json,
                                sit_eval_summary* summary);

SIT_API sit_status sit_project(const sit_config* config, const sit_model* model,
                               const sit_corpus* corpus, sit_projection method,
                               uint64_t seed, const char* out_csv);

/* Full pipeline into out_dir; the comparison table is written to
 * <out_dir>/comparison.md. */
SIT_API sit_status sit_repro(const sit_config* config, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* SIT_SIT_H_ */
