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
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "sit/corpus.hpp"
#include "sit/error.hpp"
#include "sit/evaluation.hpp"
#include "test_util.hpp"

namespace sit {
namespace {

namespace fs = std::filesystem;

SyntheticCorpusSpec small_spec() {
  SyntheticCorpusSpec s;
  s.n_senones = 5;
  s.n_speakers = 3;
  s.n_test_speakers = 2;
  s.base_dim = 4;
  s.speaker_rank = 0;
  s.frames_per_cell = 6;
  s.seed = 17;
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kArgument;
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("sit_corpus_test_" + name);
}

TEST(GenCorpus, AllScalesZeroGivesPrototypes) {
  SyntheticCorpusSpec s = small_spec();
  s.speaker_shift_scale = s.speaker_warp_scale = s.noise_scale = 0.0;
  GeneratorParams g = generator_params(s);
  for (Partition p : {Partition::kTrain, Partition::kTest}) {
    RawCorpus c = gen_corpus(s, p);
    for (std::size_t i = 0; i < c.frames.rows(); ++i) {
      auto row = c.frames.row(i);
      auto proto = g.prototypes.row(c.senones[i]);
      for (std::size_t j = 0; j < row.size(); ++j) EXPECT_EQ(row[j], proto[j]);
    }
  }
}

TEST(GenCorpus, NoNoiseMakesCellsConstant) {
  SyntheticCorpusSpec s = small_spec();
  s.noise_scale = 0.0;
  RawCorpus c = gen_corpus(s, Partition::kTrain);
  for (std::size_t i = 1; i < c.frames.rows(); ++i) {
    if (c.senones[i] != c.senones[i - 1] || c.speakers[i] != c.speakers[i - 1]) continue;
    auto a = c.frames.row(i), b = c.frames.row(i - 1);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin())) << i;
  }
}

TEST(GenCorpus, FollowsTheGenerativeFormula) {
  SyntheticCorpusSpec s = small_spec();
  s.noise_scale = 0.0;
  s.speaker_shift_scale = 0.7;
  s.speaker_warp_scale = 0.2;
  GeneratorParams g = generator_params(s);
  RawCorpus c = gen_corpus(s, Partition::kTest);
  for (std::size_t i = 0; i < c.frames.rows(); i += 7) {
    const auto q = c.senones[i], a = c.speakers[i];
    for (std::size_t k = 0; k < s.base_dim; ++k) {
      double warped = 0.0;
      for (std::size_t m = 0; m < s.base_dim; ++m) warped += g.warps[a](k, m) * g.prototypes(q, m);
      const double expected = g.prototypes(q, k) + 0.2 * warped + 0.7 * g.shifts[a][k];
      EXPECT_NEAR(c.frames(i, k), expected, 1e-12);
    }
  }
}

TEST(GenCorpus, DeterministicAndDisjointSpeakers) {
  SyntheticCorpusSpec s = small_spec();
  RawCorpus a = gen_corpus(s, Partition::kTrain);
  RawCorpus b = gen_corpus(s, Partition::kTrain);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.senones, b.senones);
  RawCorpus t = gen_corpus(s, Partition::kTest);
  std::set<std::uint32_t> train_ids(a.speakers.begin(), a.speakers.end());
  std::set<std::uint32_t> test_ids(t.speakers.begin(), t.speakers.end());
  EXPECT_EQ(train_ids, (std::set<std::uint32_t>{0, 1, 2}));
  EXPECT_EQ(test_ids, (std::set<std::uint32_t>{3, 4}));
  EXPECT_EQ(a.frames.rows(), 3u * 5u * 6u);
}

TEST(GenCorpus, LowRankOffsetsStayInTheirSubspace) {
  SyntheticCorpusSpec s = small_spec();
  s.base_dim = 6;
  s.n_speakers = 5;
  s.speaker_rank = 1;
  GeneratorParams g = generator_params(s);
  // Rank one: every offset is parallel to the first.
  const Vector& u = g.shifts[0];
  for (const Vector& v : g.shifts) {
    double uu = 0, vv = 0, uv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      uu += u[i] * u[i];
      vv += v[i] * v[i];
      uv += u[i] * v[i];
    }
    EXPECT_NEAR(uv * uv, uu * vv, 1e-9 * uu * vv);
  }
  s.speaker_rank = 7;
  EXPECT_EQ(code_of([&] { generator_params(s); }), ErrorCode::kConfig);
}

TEST(GenCorpus, InvalidSpecNamesField) {
  SyntheticCorpusSpec s = small_spec();
  s.n_speakers = 0;
  try {
    validate(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_NE(std::string(e.what()).find("n_speakers"), std::string::npos);
  }
  s = small_spec();
  s.noise_scale = -1.0;
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::kConfig);
}

TEST(Splice, FullScaleWidth) {
  Matrix frames(3, 87);
  EXPECT_EQ(splice(frames, 5, 5).cols(), 957u);
  EXPECT_EQ(splice(frames, 5, 5).rows(), 3u);
}

TEST(Splice, ZeroContextIsIdentity) {
  std::mt19937_64 rng(1);
  Matrix f = testing::random_matrix(5, 3, rng);
  EXPECT_EQ(splice(f, 0, 0), f);
}

TEST(Splice, SingleFrameReplicatesEdges) {
  Matrix f{{7.0}};
  EXPECT_EQ(splice(f, 2, 2), (Matrix{{7.0, 7.0, 7.0, 7.0, 7.0}}));
}

TEST(Splice, ClampsAtBothEnds) {
  Matrix f{{1.0}, {2.0}, {3.0}};
  EXPECT_EQ(splice(f, 1, 1), (Matrix{{1, 1, 2}, {1, 2, 3}, {2, 3, 3}}));
}

TEST(Splice, SegmentsDoNotLeak) {
  Matrix f{{1.0}, {2.0}, {10.0}, {20.0}};
  const std::size_t lengths[] = {2, 2};
  EXPECT_EQ(splice_segments(f, lengths, 1, 1),
            (Matrix{{1, 1, 2}, {1, 2, 2}, {10, 10, 20}, {10, 20, 20}}));
}

TEST(Normalize, ZeroMeanUnitVariance) {
  std::mt19937_64 rng(2);
  Matrix f = testing::random_matrix(50, 4, rng, 3.0);
  for (std::size_t i = 0; i < 50; ++i) f(i, 2) += 10.0;
  NormStats stats;
  Matrix n = normalize(f, &stats);
  EXPECT_EQ(n.rows(), f.rows());
  EXPECT_EQ(n.cols(), f.cols());
  for (std::size_t j = 0; j < 4; ++j) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 50; ++i) m += n(i, j);
    m /= 50;
    for (std::size_t i = 0; i < 50; ++i) v += (n(i, j) - m) * (n(i, j) - m);
    v /= 50;
    EXPECT_NEAR(m, 0.0, 1e-10);
    EXPECT_NEAR(v, 1.0, 1e-10);
  }
  EXPECT_TRUE(stats.warnings.empty());
}

TEST(Normalize, ConstantDimensionBecomesZeroWithWarning) {
  Matrix f{{1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}};
  NormStats stats;
  Matrix n = normalize(f, &stats);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(n(i, 1), 0.0);
  EXPECT_EQ(stats.stddev[1], kNormEpsilon);
  ASSERT_EQ(stats.warnings.size(), 1u);
}

TEST(Normalize, TrainStatsDoNotRecenterShiftedData) {
  std::mt19937_64 rng(3);
  Matrix train = testing::random_matrix(40, 3, rng);
  NormStats stats;
  normalize(train, &stats);
  Matrix shifted = train;
  for (double& v : shifted.data()) v += 2.5;
  Matrix a = apply_normalization(train, stats);
  Matrix b = apply_normalization(shifted, stats);
  for (std::size_t j = 0; j < 3; ++j) {
    double offset = 0;
    for (std::size_t i = 0; i < 40; ++i) offset += b(i, j) - a(i, j);
    EXPECT_NEAR(offset / 40, 2.5 / stats.stddev[j], 1e-10);
  }
}

TEST(Normalize, NeedsTwoFrames) {
  EXPECT_EQ(code_of([] { normalize(Matrix{{1.0, 2.0}}, nullptr); }), ErrorCode::kArgument);
}

TEST(BuildCorpora, DefaultShapes) {
  CorpusPair c = build_corpora(SyntheticCorpusSpec{});
  EXPECT_EQ(c.train.size(), 16000u);
  EXPECT_EQ(c.train.dim(), 65u);
  EXPECT_EQ(c.test.size(), 4000u);
  EXPECT_EQ(c.train.n_senones, 20u);
  EXPECT_EQ(c.train.n_speakers, 10u);
  EXPECT_EQ(c.test.distinct_speakers(), (std::vector<std::uint32_t>{8, 9}));
  // Test data reuses the training statistics.
  EXPECT_EQ(c.test.stats.mean, c.train.stats.mean);
}

class SitcFile : public ::testing::Test {
 protected:
  void SetUp() override { batch = build_corpora(small_spec()).train; }
  FrameBatch batch;
};

TEST_F(SitcFile, RoundTripIsValueExact) {
  const fs::path p = temp_path("roundtrip.sitc");
  save_corpus(batch, p);
  FrameBatch back = load_corpus(p);
  EXPECT_EQ(back.frames, batch.frames);
  EXPECT_EQ(back.senones, batch.senones);
  EXPECT_EQ(back.speakers, batch.speakers);
  EXPECT_EQ(back.n_senones, batch.n_senones);
  EXPECT_EQ(back.n_speakers, batch.n_speakers);
  EXPECT_EQ(fs::file_size(p), 21u + batch.size() * batch.dim() * 8 + batch.size() * 8 + 4);
  fs::remove(p);
}

TEST_F(SitcFile, ExtremeValuesSurvive) {
  batch.frames(0, 0) = std::numeric_limits<double>::denorm_min();
  batch.frames(0, 1) = -0.0;
  batch.frames(1, 0) = std::numeric_limits<double>::max();
  FrameBatch back = decode_corpus(encode_corpus(batch));
  EXPECT_EQ(back.frames(0, 0), std::numeric_limits<double>::denorm_min());
  EXPECT_TRUE(std::signbit(back.frames(0, 1)));
  EXPECT_EQ(back.frames(1, 0), std::numeric_limits<double>::max());
}

TEST_F(SitcFile, CorruptMagic) {
  auto bytes = encode_corpus(batch);
  bytes[0] = 'X';
  EXPECT_EQ(code_of([&] { decode_corpus(bytes); }), ErrorCode::kMalformedHeader);
}

TEST_F(SitcFile, WrongVersion) {
  auto bytes = encode_corpus(batch);
  bytes[4] = 99;
  EXPECT_EQ(code_of([&] { decode_corpus(bytes); }), ErrorCode::kMalformedHeader);
}

TEST_F(SitcFile, Truncated) {
  auto bytes = encode_corpus(batch);
  bytes.resize(bytes.size() - 9);
  EXPECT_EQ(code_of([&] { decode_corpus(bytes); }), ErrorCode::kTruncated);
  bytes.resize(10);
  EXPECT_EQ(code_of([&] { decode_corpus(bytes); }), ErrorCode::kMalformedHeader);
}

TEST_F(SitcFile, FlippedPayloadByte) {
  auto bytes = encode_corpus(batch);
  bytes[40] ^= 0x10;
  EXPECT_EQ(code_of([&] { decode_corpus(bytes); }), ErrorCode::kChecksumMismatch);
}

TEST_F(SitcFile, ZeroFramesRejected) {
  std::vector<std::uint8_t> bytes = {'S', 'I', 'T', 'C', kCorpusFormatVersion};
  for (std::uint32_t v : {0u, 4u, 5u, 3u})
    for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  for (int k = 0; k < 4; ++k) bytes.push_back(0);
  EXPECT_EQ(code_of([&] { decode_corpus(bytes); }), ErrorCode::kMalformedHeader);
}

TEST_F(SitcFile, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_corpus(temp_path("does_not_exist.sitc")); }), ErrorCode::kIo);
}

TEST_F(SitcFile, CsvExport) {
  const fs::path p = temp_path("export.csv");
  export_corpus_csv(batch, p);
  std::ifstream in(p);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header.substr(0, 6), "f0,f1,");
  EXPECT_EQ(header.substr(header.size() - 14), "senone,speaker");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, batch.size());
  fs::remove(p);
}

// Speaker identity is linearly recoverable from raw frames.
TEST(Separability, SpeakersAboveChanceOnRawFrames) {
  SyntheticCorpusSpec s = small_spec();
  s.n_speakers = 4;
  s.frames_per_cell = 40;
  s.noise_scale = 0.5;
  FrameBatch b = build_corpora(s).train;
  ProbeConfig linear;
  linear.hidden = {};
  linear.epochs = 30;
  ProbeResult r = speaker_probe(b.frames, b.speakers, linear, 1);
  EXPECT_DOUBLE_EQ(r.chance, 0.25);
  EXPECT_GT(r.accuracy, 0.25 + 0.3);
}

// Noise below half the closest prototype gap keeps nearest-prototype
// classification above 95%.
TEST(Separability, NearestPrototypeOnRawFrames) {
  SyntheticCorpusSpec s = small_spec();
  s.n_senones = 20;
  s.base_dim = 13;
  s.frames_per_cell = 50;
  s.speaker_shift_scale = s.speaker_warp_scale = 0.0;
  GeneratorParams g = generator_params(s);
  double dmin = INFINITY;
  for (std::size_t a = 0; a < s.n_senones; ++a)
    for (std::size_t b = a + 1; b < s.n_senones; ++b) {
      double d = 0;
      for (std::size_t k = 0; k < s.base_dim; ++k)
        d += std::pow(g.prototypes(a, k) - g.prototypes(b, k), 2);
      dmin = std::min(dmin, std::sqrt(d));
    }
  s.noise_scale = 0.49 * dmin / std::sqrt(static_cast<double>(s.base_dim));
  RawCorpus c = gen_corpus(s, Partition::kTrain);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < c.frames.rows(); ++i) {
    double best = INFINITY;
    std::uint32_t arg = 0;
    for (std::uint32_t q = 0; q < s.n_senones; ++q) {
      double d = 0;
      for (std::size_t k = 0; k < s.base_dim; ++k)
        d += std::pow(c.frames(i, k) - g.prototypes(q, k), 2);
      if (d < best) {
        best = d;
        arg = q;
      }
    }
    correct += arg == c.senones[i];
  }
  EXPECT_GT(static_cast<double>(correct) / static_cast<double>(c.frames.rows()), 0.95);
}

}  // namespace
}  // namespace sit
