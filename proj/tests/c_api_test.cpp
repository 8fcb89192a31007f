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
#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "sit/sit.h"

namespace {

namespace fs = std::filesystem;

constexpr const char* kSmallConfig = R"({
  "corpus": {"n_senones": 4, "n_speakers": 3, "n_test_speakers": 2, "base_dim": 3, "speaker_rank": 0,
             "frames_per_cell": 12, "splice_left": 1, "splice_right": 1},
  "topology": {"hidden": [8, 8, 8], "speaker_hidden": [6], "activation": "tanh"},
  "hyper": {"epochs": 2, "batch_size": 16, "mu": 0.01},
  "adapt": {"epochs": 1},
  "eval": {"probe": {"epochs": 2},
           "tsne": {"iterations": 60, "exaggeration_iterations": 20, "perplexity": 4},
           "projection_speakers": 3}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          (std::string("sit_c_api_test_") +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
    ASSERT_EQ(sit_config_parse(kSmallConfig, &config), SIT_OK) << sit_last_error();
    ASSERT_EQ(sit_corpus_generate(config, &train, &test), SIT_OK) << sit_last_error();
  }
  void TearDown() override {
    sit_corpus_free(train);
    sit_corpus_free(test);
    sit_config_free(config);
    fs::remove_all(dir);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }

  sit_model* train_si(sit_train_summary* summary = nullptr) {
    sit_model* m = nullptr;
    EXPECT_EQ(sit_train(config, SIT_MODE_SI, train, nullptr, nullptr, nullptr, &m, summary),
              SIT_OK)
        << sit_last_error();
    return m;
  }

  fs::path dir;
  sit_config* config = nullptr;
  sit_corpus* train = nullptr;
  sit_corpus* test = nullptr;
};

TEST(CApiBasics, VersionAndStatusNames) {
  EXPECT_STRNE(sit_version(), "");
  EXPECT_STREQ(sit_status_name(SIT_OK), "ok");
  EXPECT_STRNE(sit_status_name(SIT_ERR_CHECKSUM), sit_status_name(SIT_ERR_TRUNCATED));
}

TEST(CApiBasics, NullArgumentsRejected) {
  EXPECT_EQ(sit_config_default(nullptr), SIT_ERR_ARGUMENT);
  EXPECT_NE(std::string(sit_last_error()).find("out"), std::string::npos);
  sit_corpus_info info;
  EXPECT_EQ(sit_corpus_get_info(nullptr, &info), SIT_ERR_ARGUMENT);
  sit_config_free(nullptr);
  sit_corpus_free(nullptr);
  sit_model_free(nullptr);
}

TEST(CApiBasics, ConfigErrorsNameTheField) {
  sit_config* c = nullptr;
  EXPECT_EQ(sit_config_parse(R"({"corpus": {"n_speakers": 0}})", &c), SIT_ERR_CONFIG);
  EXPECT_EQ(c, nullptr);
  EXPECT_NE(std::string(sit_last_error()).find("n_speakers"), std::string::npos);
  EXPECT_EQ(sit_config_load("/nonexistent/cfg.json", &c), SIT_ERR_IO);
  ASSERT_EQ(sit_config_default(&c), SIT_OK);
  EXPECT_EQ(sit_config_set_lambda(c, -2.0), SIT_ERR_CONFIG);
  EXPECT_EQ(sit_config_set_n_h(c, 9), SIT_ERR_CONFIG);
  EXPECT_EQ(sit_config_set_n_h(c, 1), SIT_OK);
  const char* out_dir = nullptr;
  EXPECT_EQ(sit_config_get_path(c, "out_dir", &out_dir), SIT_OK);
  EXPECT_STREQ(out_dir, "out");
  EXPECT_EQ(sit_config_get_path(c, "nope", &out_dir), SIT_ERR_ARGUMENT);
  std::uint64_t seed = 0;
  EXPECT_EQ(sit_config_set_seed(c, 99), SIT_OK);
  EXPECT_EQ(sit_config_get_eval_seed(c, &seed), SIT_OK);
  EXPECT_EQ(seed, 99u);
  sit_config_free(c);
}

TEST_F(CApi, CorpusInfoAndRoundTrip) {
  sit_corpus_info info;
  ASSERT_EQ(sit_corpus_get_info(train, &info), SIT_OK);
  EXPECT_EQ(info.n_frames, 3u * 4u * 12u);
  EXPECT_EQ(info.dim, 9u);
  EXPECT_EQ(info.n_senones, 4u);
  EXPECT_EQ(info.n_speakers, 5u);
  EXPECT_EQ(info.n_distinct_speakers, 3u);
  ASSERT_EQ(sit_corpus_get_info(test, &info), SIT_OK);
  EXPECT_EQ(info.n_distinct_speakers, 2u);

  ASSERT_EQ(sit_corpus_save(train, path("a.sitc").c_str()), SIT_OK);
  sit_corpus* back = nullptr;
  ASSERT_EQ(sit_corpus_load(path("a.sitc").c_str(), &back), SIT_OK);
  ASSERT_EQ(sit_corpus_save(back, path("b.sitc").c_str()), SIT_OK);
  EXPECT_EQ(slurp(path("a.sitc")), slurp(path("b.sitc")));
  EXPECT_EQ(sit_corpus_export_csv(back, path("a.csv").c_str()), SIT_OK);
  sit_corpus_free(back);
}

TEST_F(CApi, CorruptCorpusStatuses) {
  ASSERT_EQ(sit_corpus_save(train, path("a.sitc").c_str()), SIT_OK);
  std::string bytes = slurp(path("a.sitc"));
  auto write = [&](const std::string& b) {
    std::ofstream(path("bad.sitc"), std::ios::binary) << b;
  };
  sit_corpus* c = nullptr;
  std::string flipped = bytes;
  flipped[30] ^= 1;
  write(flipped);
  EXPECT_EQ(sit_corpus_load(path("bad.sitc").c_str(), &c), SIT_ERR_CHECKSUM);
  write(bytes.substr(0, bytes.size() - 5));
  EXPECT_EQ(sit_corpus_load(path("bad.sitc").c_str(), &c), SIT_ERR_TRUNCATED);
  write("JUNK" + bytes.substr(4));
  EXPECT_EQ(sit_corpus_load(path("bad.sitc").c_str(), &c), SIT_ERR_MALFORMED_HEADER);
  EXPECT_EQ(c, nullptr);
}

TEST_F(CApi, TrainSiThenSit) {
  sit_train_summary summary{};
  sit_model* si = train_si(&summary);
  ASSERT_NE(si, nullptr);
  // 144 frames in batches of 16 for 2 epochs.
  EXPECT_EQ(summary.log_rows, 18u);
  sit_model_info info;
  ASSERT_EQ(sit_model_get_info(si, &info), SIT_OK);
  EXPECT_EQ(info.is_sit, 0);
  EXPECT_EQ(info.input_dim, 9u);
  EXPECT_TRUE(info.has_train_accuracy);
  EXPECT_EQ(info.train_accuracy, summary.final_train_accuracy);

  sit_model* bad = nullptr;
  EXPECT_EQ(sit_train(config, SIT_MODE_SIT, train, nullptr, nullptr, nullptr, &bad, nullptr),
            SIT_ERR_ARGUMENT);

  sit_model* sit = nullptr;
  ASSERT_EQ(sit_train(config, SIT_MODE_SIT, train, si, path("sit.log.csv").c_str(), nullptr,
                      &sit, &summary),
            SIT_OK)
      << sit_last_error();
  ASSERT_EQ(sit_model_get_info(sit, &info), SIT_OK);
  EXPECT_EQ(info.is_sit, 1);
  EXPECT_EQ(info.n_h, 2u);
  EXPECT_EQ(info.n_speakers, 3u);
  EXPECT_GT(summary.final_speaker_loss, 0.0);

  ASSERT_EQ(sit_model_save(sit, path("sit.json").c_str()), SIT_OK);
  sit_model* back = nullptr;
  ASSERT_EQ(sit_model_load(path("sit.json").c_str(), &back), SIT_OK);
  ASSERT_EQ(sit_model_save(back, path("sit2.json").c_str()), SIT_OK);
  EXPECT_EQ(slurp(path("sit.json")), slurp(path("sit2.json")));

  sit_model_free(back);
  sit_model_free(sit);
  sit_model_free(si);
}

TEST_F(CApi, EvaluateAgreesWithTrainer) {
  sit_train_summary summary{};
  sit_model* si = train_si(&summary);
  sit_eval_summary eval{};
  ASSERT_EQ(sit_evaluate(config, si, train, path("report.json").c_str(), &eval), SIT_OK)
      << sit_last_error();
  EXPECT_EQ(eval.senone_frame_accuracy, summary.final_train_accuracy);
  EXPECT_EQ(eval.n_frames, 144u);
  EXPECT_GE(eval.invariance_ratio, 0.0);
  EXPECT_TRUE(fs::exists(path("report.json")));
  sit_model_free(si);
}

TEST_F(CApi, MismatchedCorpus) {
  sit_model* si = train_si();
  sit_config* other_cfg = nullptr;
  ASSERT_EQ(sit_config_parse(R"({"corpus": {"n_senones": 4, "base_dim": 5,
      "frames_per_cell": 3, "n_speakers": 2}})", &other_cfg), SIT_OK);
  sit_corpus *other_train = nullptr, *other_test = nullptr;
  ASSERT_EQ(sit_corpus_generate(other_cfg, &other_train, &other_test), SIT_OK);
  sit_eval_summary eval{};
  EXPECT_EQ(sit_evaluate(config, si, other_train, nullptr, &eval), SIT_ERR_MISMATCH);
  sit_corpus_free(other_train);
  sit_corpus_free(other_test);
  sit_config_free(other_cfg);
  sit_model_free(si);
}

TEST_F(CApi, AdaptRowsAndFiles) {
  sit_model* si = train_si();
  sit_adapt_row rows[1];
  std::size_t count = 0;
  ASSERT_EQ(sit_adapt(config, si, test, dir.string().c_str(), "sa_si",
                      path("adapt.csv").c_str(), rows, 1, &count),
            SIT_OK)
      << sit_last_error();
  EXPECT_EQ(count, 2u);
  EXPECT_EQ(rows[0].speaker, 3u);
  EXPECT_EQ(rows[0].pseudo_label_agreement, rows[0].pre_accuracy);
  EXPECT_TRUE(fs::exists(path("sa_si_spk3.json")));
  EXPECT_TRUE(fs::exists(path("sa_si_spk4.json")));
  sit_model_free(si);
}

TEST_F(CApi, ProjectionsAreDeterministic) {
  sit_model* si = train_si();
  for (sit_projection m : {SIT_PROJECT_PCA, SIT_PROJECT_TSNE}) {
    ASSERT_EQ(sit_project(config, si, train, m, 3, path("p1.csv").c_str()), SIT_OK)
        << sit_last_error();
    ASSERT_EQ(sit_project(config, si, train, m, 3, path("p2.csv").c_str()), SIT_OK);
    EXPECT_EQ(slurp(path("p1.csv")), slurp(path("p2.csv")));
    // One senone from three speakers, twelve frames each, plus the header.
    const std::string text = slurp(path("p1.csv"));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 37);
  }
  EXPECT_EQ(sit_project(config, si, train, static_cast<sit_projection>(7), 3,
                        path("p3.csv").c_str()),
            SIT_ERR_ARGUMENT);
  sit_model_free(si);
}

}  // namespace
