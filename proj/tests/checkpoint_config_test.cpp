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

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "json.hpp"
#include "sit/checkpoint.hpp"
#include "sit/config.hpp"
#include "sit/error.hpp"
#include "test_util.hpp"

namespace sit {
namespace {

ErrorCode code_of(const std::function<void()>& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kArgument;
}

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.kind = ModelKind::kSit;
  c.topology.hidden = {6, 5, 4};
  c.topology.speaker_hidden = {5};
  c.topology.activation = Activation::kTanh;
  c.params = testing::small_split_model(4, 5, 3, 9);
  c.hyper.lambda = 3.0;
  c.hyper.sit_mu = 0.001;
  c.hyper.seed = 77;
  c.train_frame_accuracy = 0.8125;
  return c;
}

TEST(Checkpoint, RoundTripIsValueExact) {
  Checkpoint c = sample_checkpoint();
  c.params.feature[0].weights(0, 0) = 1.0 / 3.0;
  c.params.feature[0].weights(0, 1) = std::numeric_limits<double>::denorm_min();
  c.params.feature[0].weights(0, 2) = -0.0;
  c.params.feature[0].bias[0] = -std::numeric_limits<double>::max();
  Checkpoint back = decode_checkpoint(encode_checkpoint(c));
  EXPECT_EQ(back.params, c.params);
  EXPECT_TRUE(std::signbit(back.params.feature[0].weights(0, 2)));
  EXPECT_EQ(back.kind, ModelKind::kSit);
  EXPECT_EQ(back.topology.hidden, c.topology.hidden);
  EXPECT_EQ(back.topology.activation, Activation::kTanh);
  EXPECT_EQ(back.hyper.lambda, 3.0);
  EXPECT_EQ(back.hyper.sit_mu, std::optional<double>(0.001));
  EXPECT_EQ(back.hyper.seed, 77u);
  EXPECT_EQ(back.train_frame_accuracy, std::optional<double>(0.8125));
  EXPECT_EQ(params_crc32(back.params), params_crc32(c.params));
}

TEST(Checkpoint, FileRoundTripForSingleStack) {
  Checkpoint c;
  c.params = init_si_model(7, Topology{}, 20, 3);
  const auto path = std::filesystem::temp_directory_path() / "sit_ckpt_test.json";
  save_checkpoint(c, path);
  Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back.params, c.params);
  EXPECT_EQ(back.kind, ModelKind::kSi);
  EXPECT_FALSE(back.train_frame_accuracy.has_value());
  std::filesystem::remove(path);
}

TEST(Checkpoint, TruncatedText) {
  std::string text = encode_checkpoint(sample_checkpoint());
  text.resize(text.size() / 2);
  EXPECT_EQ(code_of([&] { decode_checkpoint(text); }), ErrorCode::kTruncated);
}

TEST(Checkpoint, EditedWeightFailsChecksum) {
  auto j = nlohmann::json::parse(encode_checkpoint(sample_checkpoint()));
  double& w = j["groups"]["senone"][0]["weights"][0].get_ref<double&>();
  w = std::nextafter(w, 10.0);
  EXPECT_EQ(code_of([&] { decode_checkpoint(j.dump()); }), ErrorCode::kChecksumMismatch);
}

TEST(Checkpoint, MalformedDocuments) {
  auto j = nlohmann::json::parse(encode_checkpoint(sample_checkpoint()));
  auto tagged = j;
  tagged["format"] = "something-else";
  EXPECT_EQ(code_of([&] { decode_checkpoint(tagged.dump()); }), ErrorCode::kMalformedHeader);
  auto extra = j;
  extra["surprise"] = 1;
  EXPECT_EQ(code_of([&] { decode_checkpoint(extra.dump()); }), ErrorCode::kMalformedHeader);
  auto short_bias = j;
  short_bias["groups"]["feature"][0]["bias"].erase(0);
  EXPECT_EQ(code_of([&] { decode_checkpoint(short_bias.dump()); }), ErrorCode::kMalformedHeader);
  EXPECT_EQ(code_of([&] { decode_checkpoint("[1, 2, 3]"); }), ErrorCode::kMalformedHeader);
  EXPECT_EQ(code_of([&] { decode_checkpoint("{\"format\": @}"); }), ErrorCode::kMalformedHeader);
}

TEST(Checkpoint, MissingFile) {
  EXPECT_EQ(code_of([] { load_checkpoint("/nonexistent/dir/model.json"); }), ErrorCode::kIo);
}

TEST(Checkpoint, CrcSeesOneBit) {
  ModelParams p = testing::small_split_model(4, 5, 3, 9);
  const std::uint32_t before = params_crc32(p);
  p.speaker.back().bias[0] = std::nextafter(p.speaker.back().bias[0], 1.0);
  EXPECT_NE(params_crc32(p), before);
}

TEST(Config, EmptyObjectGivesDefaults) {
  RunConfig c = parse_config("{}");
  EXPECT_EQ(c.corpus.n_senones, 20u);
  EXPECT_EQ(c.hyper.lambda, 3.0);
  EXPECT_EQ(c.hyper.n_h, 2u);
  EXPECT_EQ(c.adapt.layers_to_adapt, (std::set<std::size_t>{0, 1}));
  EXPECT_EQ(config_json(c), config_json(RunConfig{}));
}

TEST(Config, ManifestRoundTrips) {
  RunConfig c;
  c.corpus.noise_scale = 0.123456789;
  c.hyper.sit_mu = 0.0007;
  c.adapt.layers_to_adapt = {0};
  c.adapt.mu_adapt = 0.01;
  c.eval.tsne.perplexity = 12.5;
  c.paths.out_dir = "elsewhere";
  const std::string text = config_json(c);
  EXPECT_EQ(config_json(parse_config(text)), text);
  RunConfig back = parse_config(text);
  EXPECT_EQ(back.corpus.noise_scale, 0.123456789);
  EXPECT_EQ(back.adapt.mu_adapt, std::optional<double>(0.01));
}

TEST(Config, UnknownKeysNamed) {
  std::string msg;
  EXPECT_EQ(code_of([&] { parse_config(R"({"hyperparams": {}})"); }, &msg), ErrorCode::kConfig);
  EXPECT_NE(msg.find("hyperparams"), std::string::npos) << msg;
  EXPECT_EQ(code_of([&] { parse_config(R"({"hyper": {"lamda": 1}})"); }, &msg), ErrorCode::kConfig);
  EXPECT_NE(msg.find("lamda"), std::string::npos) << msg;
}

TEST(Config, TypeAndRangeErrors) {
  EXPECT_EQ(code_of([] { parse_config(R"({"corpus": {"n_senones": -3}})"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { parse_config(R"({"corpus": {"n_senones": "20"}})"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { parse_config(R"({"hyper": {"lambda": -1}})"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { parse_config(R"({"hyper": {"n_h": 4}})"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { parse_config("not json"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { parse_config(R"({"adapt": {"layers": [0, 9]}})"); }), ErrorCode::kConfig);
}

TEST(Config, ZeroSpeakersNamesField) {
  std::string msg;
  EXPECT_EQ(code_of([&] { parse_config(R"({"corpus": {"n_speakers": 0}})"); }, &msg),
            ErrorCode::kConfig);
  EXPECT_NE(msg.find("n_speakers"), std::string::npos) << msg;
}

TEST(Config, OverrideSeedTouchesEveryStage) {
  RunConfig c;
  override_seed(c, 1234);
  EXPECT_EQ(c.corpus.seed, 1234u);
  EXPECT_EQ(c.hyper.seed, 1234u);
  EXPECT_EQ(c.adapt.seed, 1234u);
  EXPECT_EQ(c.eval.seed, 1234u);
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_config("/nonexistent/config.json"); }), ErrorCode::kIo);
}

}  // namespace
}  // namespace sit
