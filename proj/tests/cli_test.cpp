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
// Drives the sit executable end to end on a tiny configuration.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kTinyConfig = R"({
  "corpus": {"n_senones": 4, "n_speakers": 3, "n_test_speakers": 2, "base_dim": 3,
             "speaker_rank": 0, "frames_per_cell": 12, "splice_left": 1, "splice_right": 1},
  "topology": {"hidden": [8, 8, 8], "speaker_hidden": [6], "activation": "tanh"},
  "hyper": {"epochs": 2, "batch_size": 16, "mu": 0.01},
  "adapt": {"epochs": 1},
  "eval": {"probe": {"epochs": 2},
           "tsne": {"iterations": 60, "exaggeration_iterations": 20, "perplexity": 4},
           "projection_speakers": 3}
})";

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> v;
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          (std::string("sit_cli_test_") +
           ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
    config = write("config.json", kTinyConfig);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  }

  RunResult run(const std::string& args) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string("SIT_LOG_LEVEL=error '") + SIT_CLI_PATH + "' " + args +
                            " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::string cfg() const { return "--config '" + config.string() + "'"; }
  std::string at(const std::string& name) const { return "'" + (dir / name).string() + "'"; }

  void gen(const std::string& sub = "data") {
    const RunResult r = run("gen-data " + cfg() + " --out " + at(sub));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  // Returns the trainer's stdout.
  std::string train(const std::string& extra, const std::string& out) {
    const RunResult r = run("train " + cfg() + " --corpus " + at("data/train.sitc") + " " +
                            extra + " --out " + at(out));
    EXPECT_EQ(r.code, 0) << r.err;
    return r.out;
  }

  fs::path dir;
  fs::path config;
};

// Acoustic stack (feature ++ senone) of a checkpoint file.
json acoustic_layers(const fs::path& checkpoint) {
  const json j = json::parse(slurp(checkpoint));
  json layers = json::array();
  for (const char* g : {"feature", "senone"})
    for (const json& l : j["groups"][g]) layers.push_back(l);
  return layers;
}

std::string after(const std::string& text, const std::string& marker) {
  const auto pos = text.find(marker);
  if (pos == std::string::npos) return {};
  std::istringstream s(text.substr(pos + marker.size()));
  std::string token;
  s >> token;
  return token;
}

TEST_F(Cli, GenDataSummaryAndByteIdenticalRerun) {
  const RunResult r = run("gen-data " + cfg() + " --out " + at("a"));
  ASSERT_EQ(r.code, 0) << r.err;
  // 4 senones x 3 speakers x 12 frames; splice 1+1+1 over 3 dims.
  EXPECT_NE(r.out.find("train: 144 frames x 9 dims, 4 senones, 3 speakers"), std::string::npos)
      << r.out;
  EXPECT_NE(r.out.find("test: 96 frames x 9 dims, 4 senones, 2 speakers"), std::string::npos)
      << r.out;
  ASSERT_EQ(run("gen-data " + cfg() + " --out " + at("b")).code, 0);
  for (const char* f : {"train.sitc", "test.sitc", "gen_manifest.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
}

TEST_F(Cli, SeedFlagChangesTheCorpus) {
  gen("a");
  ASSERT_EQ(run("gen-data " + cfg() + " --seed 99 --out " + at("b")).code, 0);
  EXPECT_NE(slurp(dir / "a" / "train.sitc"), slurp(dir / "b" / "train.sitc"));
}

TEST_F(Cli, CsvExportOnRequest) {
  ASSERT_EQ(run("gen-data " + cfg() + " --csv --out " + at("data")).code, 0);
  EXPECT_EQ(lines(dir / "data" / "train.csv").size(), 145u);
}

TEST_F(Cli, ZeroSpeakersIsAConfigErrorNamingTheField) {
  config = write("bad.json", R"({"corpus": {"n_speakers": 0}})");
  const RunResult r = run("gen-data " + cfg() + " --out " + at("data"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("n_speakers"), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownKeyAndBadFlagAreConfigErrors) {
  config = write("bad.json", R"({"hyper": {"lamda": 2.0}})");
  RunResult r = run("gen-data " + cfg() + " --out " + at("data"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("lamda"), std::string::npos) << r.err;
  config = write("config.json", kTinyConfig);
  EXPECT_EQ(run("train --no-such-flag").code, 2);
  EXPECT_EQ(run("train " + cfg() + " --mode both --out " + at("m.json")).code, 2);
}

TEST_F(Cli, IoAndFormatErrors) {
  gen();
  EXPECT_EQ(run("train " + cfg() + " --corpus " + at("missing.sitc") + " --out " + at("m.json"))
                .code,
            3);
  std::string bytes = slurp(dir / "data" / "train.sitc");
  bytes[40] = static_cast<char>(bytes[40] ^ 0x10);
  write("flipped.sitc", bytes);
  EXPECT_EQ(run("train " + cfg() + " --corpus " + at("flipped.sitc") + " --out " + at("m.json"))
                .code,
            5);
}

TEST_F(Cli, SitModeNeedsAnSiCheckpoint) {
  gen();
  const RunResult r = run("train " + cfg() + " --mode sit --corpus " + at("data/train.sitc") +
                          " --out " + at("sit.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("si-checkpoint"), std::string::npos) << r.err;
}

TEST_F(Cli, TrainWritesCheckpointLogAndManifest) {
  gen();
  const std::string out = train("--mode si", "si.json");
  // 144 frames in batches of 16 over 2 epochs.
  EXPECT_NE(out.find("18 log rows"), std::string::npos) << out;
  const auto log = lines(dir / "si.json.log.csv");
  ASSERT_EQ(log.size(), 19u);
  EXPECT_EQ(log[0], "epoch,batch,senone_loss,speaker_loss,total_loss");
  EXPECT_TRUE(fs::exists(dir / "si.json"));

  train("--mode sit --si-checkpoint " + at("si.json"), "sit.json");
  EXPECT_EQ(lines(dir / "sit.json.log.csv").size(), 19u);
  const json manifest = json::parse(slurp(dir / "sit.json.manifest.json"));
  EXPECT_EQ(manifest["hyper"]["lambda"].get<double>(), 3.0);
  EXPECT_EQ(manifest["hyper"]["n_h"].get<int>(), 2);
  EXPECT_EQ(manifest["hyper"]["batch_size"].get<int>(), 16);
  EXPECT_EQ(json::parse(slurp(dir / "sit.json"))["kind"].get<std::string>(), "sit");
}

TEST_F(Cli, ZeroLambdaSitReproducesContinuedSi) {
  gen();
  train("--mode si", "si.json");
  train("--mode si --si-checkpoint " + at("si.json"), "continued.json");
  train("--mode sit --lambda 0 --si-checkpoint " + at("si.json"), "sit0.json");
  EXPECT_EQ(acoustic_layers(dir / "sit0.json"), acoustic_layers(dir / "continued.json"));
  train("--mode sit --lambda 3 --si-checkpoint " + at("si.json"), "sit3.json");
  EXPECT_NE(acoustic_layers(dir / "sit3.json"), acoustic_layers(dir / "continued.json"));
}

TEST_F(Cli, TrainingIsReproducible) {
  gen();
  train("--mode si", "a.json");
  train("--mode si", "b.json");
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
  EXPECT_EQ(slurp(dir / "a.json.log.csv"), slurp(dir / "b.json.log.csv"));
}

TEST_F(Cli, EvalOnTrainingCorpusMatchesTrainerAccuracy) {
  gen();
  const std::string out = train("--mode si", "si.json");
  const std::string trained = after(out, "final training frame accuracy ");
  ASSERT_FALSE(trained.empty()) << out;
  const RunResult r = run("eval " + cfg() + " --checkpoint " + at("si.json") + " --corpus " +
                          at("data/train.sitc") + " --out " + at("report.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(after(r.out, "frame accuracy "), trained) << r.out;
  const json report = json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["n_frames"].get<int>(), 144);
}

TEST_F(Cli, EvalRejectsMismatchedCorpus) {
  gen();
  train("--mode si", "si.json");
  config = write("wide.json", R"({"corpus": {"n_senones": 4, "n_speakers": 3,
      "n_test_speakers": 2, "base_dim": 4, "speaker_rank": 0, "frames_per_cell": 12}})");
  ASSERT_EQ(run("gen-data " + cfg() + " --out " + at("wide")).code, 0);
  config = dir / "config.json";
  const RunResult r = run("eval " + cfg() + " --checkpoint " + at("si.json") + " --corpus " +
                          at("wide/test.sitc") + " --out " + at("report.json"));
  EXPECT_EQ(r.code, 6);
  EXPECT_NE(r.err.find("dims"), std::string::npos) << r.err;
}

TEST_F(Cli, AdaptWritesOneRowAndCheckpointPerTestSpeaker) {
  gen();
  train("--mode si", "si.json");
  const RunResult r = run("adapt " + cfg() + " --checkpoint " + at("si.json") + " --corpus " +
                          at("data/test.sitc") + " --out " + at("adapted"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = lines(dir / "adapted" / "adapted_report.csv");
  ASSERT_EQ(report.size(), 3u);
  EXPECT_EQ(report[0], "speaker,pre_accuracy,post_accuracy,pseudo_label_agreement");
  EXPECT_EQ(report[1].substr(0, 2), "3,");
  EXPECT_EQ(report[2].substr(0, 2), "4,");
  EXPECT_TRUE(fs::exists(dir / "adapted" / "adapted_spk3.json"));
  EXPECT_TRUE(fs::exists(dir / "adapted" / "adapted_spk4.json"));
  EXPECT_NE(acoustic_layers(dir / "adapted" / "adapted_spk3.json"),
            acoustic_layers(dir / "si.json"));
}

TEST_F(Cli, EmptyAdaptLayerSetLeavesTheModelUnchanged) {
  std::string text = kTinyConfig;
  text.replace(text.find(R"("adapt": {"epochs": 1})"), 22, R"("adapt": {"layers": []})");
  config = write("config.json", text);
  gen();
  train("--mode si", "si.json");
  ASSERT_EQ(run("adapt " + cfg() + " --checkpoint " + at("si.json") + " --corpus " +
                at("data/test.sitc") + " --out " + at("adapted"))
                .code,
            0);
  EXPECT_EQ(acoustic_layers(dir / "adapted" / "adapted_spk3.json"),
            acoustic_layers(dir / "si.json"));
}

TEST_F(Cli, ProjectionsAreDeterministic) {
  gen();
  train("--mode si", "si.json");
  for (const char* method : {"pca", "tsne"}) {
    for (const char* out : {"p1.csv", "p2.csv"}) {
      const RunResult r = run("project " + cfg() + " --checkpoint " + at("si.json") +
                              " --corpus " + at("data/train.sitc") + " --method " + method +
                              " --out " + at(out));
      ASSERT_EQ(r.code, 0) << r.err;
    }
    EXPECT_EQ(slurp(dir / "p1.csv"), slurp(dir / "p2.csv")) << method;
    EXPECT_GT(lines(dir / "p1.csv").size(), 1u);
  }
}

TEST_F(Cli, ReproRunsThePipeline) {
  const RunResult r = run("repro " + cfg() + " --out " + at("repro"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "repro" / "comparison.md"));
  EXPECT_NE(r.out.find("SIT"), std::string::npos) << r.out;
}

}  // namespace
