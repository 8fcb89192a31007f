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
#ifndef SIT_CORPUS_HPP_
#define SIT_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sit/matrix.hpp"

namespace sit {

// Generative recipe for a multi-speaker frame corpus. Each raw frame is
//   x = (I + warp * W_a) mu_q + shift * delta_a + noise * eps
// with seeded senone prototypes mu_q, per-speaker offsets delta_a and
// per-speaker matrices W_a, and standard Gaussian eps.
struct SyntheticCorpusSpec {
  std::size_t n_senones = 20;
  std::size_t n_speakers = 8;       // training speakers, ids [0, n_speakers)
  std::size_t n_test_speakers = 2;  // held-out speakers, ids after the training ones
  std::size_t base_dim = 13;
  std::size_t frames_per_cell = 100;  // frames per (senone, speaker) pair
  double speaker_shift_scale = 1.0;
  double speaker_warp_scale = 0.03;
  double noise_scale = 1.0;
  // Speaker offsets live in a seeded subspace of this rank; 0 means full rank.
  std::size_t speaker_rank = 5;
  std::size_t splice_left = 2;
  std::size_t splice_right = 2;
  std::uint64_t seed = 7;

  std::size_t total_speakers() const { return n_speakers + n_test_speakers; }
  std::size_t spliced_dim() const {
    return (splice_left + splice_right + 1) * base_dim;
  }
};

void validate(const SyntheticCorpusSpec& spec);

enum class Partition { kTrain, kTest };

// Frames in speaker-major, then senone, then frame order: every
// (speaker, senone) cell is one contiguous segment of frames_per_cell rows.
struct RawCorpus {
  Matrix frames;
  std::vector<std::uint32_t> senones;
  std::vector<std::uint32_t> speakers;
  std::vector<std::size_t> segment_lengths;
};

// Generator parameters drawn from spec.seed; shared by both partitions.
struct GeneratorParams {
  Matrix prototypes;                // n_senones x base_dim
  std::vector<Vector> shifts;       // per global speaker id
  std::vector<Matrix> warps;        // per global speaker id, base_dim x base_dim
};

GeneratorParams generator_params(const SyntheticCorpusSpec& spec);

RawCorpus gen_corpus(const SyntheticCorpusSpec& spec, Partition partition);

// Row i concatenates frames i-left .. i+right; indices outside [0, N) are
// clamped to the nearest valid frame.
Matrix splice(const Matrix& frames, std::size_t left, std::size_t right);
// splice applied independently to consecutive segments.
Matrix splice_segments(const Matrix& frames, std::span<const std::size_t> lengths,
                       std::size_t left, std::size_t right);

struct NormStats {
  Vector mean;
  Vector stddev;
  std::vector<std::string> warnings;
};

constexpr double kNormEpsilon = 1e-8;

// Per-dimension (x - mean) / std over all rows. Needs at least two rows.
Matrix normalize(const Matrix& frames, NormStats* stats);
Matrix apply_normalization(const Matrix& frames, const NormStats& stats);

// Spliced, normalized frames with aligned labels.
struct FrameBatch {
  Matrix frames;
  std::vector<std::uint32_t> senones;
  std::vector<std::uint32_t> speakers;
  std::uint32_t n_senones = 0;
  std::uint32_t n_speakers = 0;  // speaker-id vocabulary size
  NormStats stats;               // not serialized

  std::size_t size() const noexcept { return frames.rows(); }
  std::size_t dim() const noexcept { return frames.cols(); }

  // Subset of rows, preserving vocabulary sizes.
  FrameBatch select(std::span<const std::size_t> rows) const;
  // Rows whose speaker label equals `speaker`.
  FrameBatch speaker_subset(std::uint32_t speaker) const;
  std::vector<std::uint32_t> distinct_speakers() const;
};

// Labels aligned with frames and inside their vocabularies.
void validate(const FrameBatch& batch);

struct CorpusPair {
  FrameBatch train;
  FrameBatch test;
};

// Generates both partitions, splices each cell, normalizes the training set
// and applies the training statistics to the test set.
CorpusPair build_corpora(const SyntheticCorpusSpec& spec);

// "SITC" binary format, little-endian:
//   magic "SITC" | version u8 | N, d, |Q|, |A| as u32 | N*d f64 frames
//   | N u32 senone labels | N u32 speaker labels | CRC32 of the payload
inline constexpr std::uint8_t kCorpusFormatVersion = 1;

void save_corpus(const FrameBatch& batch, const std::filesystem::path& path);
FrameBatch load_corpus(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_corpus(const FrameBatch& batch);
FrameBatch decode_corpus(std::span<const std::uint8_t> bytes);

// One row per frame: f0..f{d-1}, senone, speaker.
void export_corpus_csv(const FrameBatch& batch, const std::filesystem::path& path);

}  // namespace sit

#endif  // SIT_CORPUS_HPP_
