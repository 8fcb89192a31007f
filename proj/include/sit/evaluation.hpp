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
#ifndef SIT_EVALUATION_HPP_
#define SIT_EVALUATION_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sit/corpus.hpp"
#include "sit/model.hpp"

namespace sit {

// Fraction of frames whose argmax senone posterior equals the label. Frame
// accuracy is the stand-in for word error rate throughout this project.
double frame_accuracy(const ModelParams& params, const FrameBatch& batch);

std::map<std::uint32_t, double> per_speaker_accuracy(const ModelParams& params,
                                                     const FrameBatch& batch);

struct ProbeConfig {
  std::vector<std::size_t> hidden{32, 32};
  Activation activation = Activation::kTanh;
  std::size_t epochs = 10;
  double mu = 0.05;  // mean-reduced loss
  std::size_t batch_size = 64;
  double train_fraction = 0.7;
};

struct ProbeResult {
  double accuracy = 0.0;
  double chance = 0.0;  // 1 / number of speakers
};

// Trains a fresh classifier on a seeded split of (features, speakers) and
// reports accuracy on the disjoint remainder.
ProbeResult speaker_probe(const Matrix& features,
                          std::span<const std::uint32_t> speakers,
                          const ProbeConfig& config, std::uint64_t seed);

// Mean over senones of
//   mean pairwise distance between per-speaker centroids of the senone
//   / mean within-(senone, speaker) RMS spread.
// Cells with fewer than two frames and senones with fewer than two speakers
// are skipped with a warning. Lower means more speaker-invariant.
double invariance_ratio(const Matrix& features, std::span<const std::uint32_t> senones,
                        std::span<const std::uint32_t> speakers,
                        std::vector<std::string>* warnings = nullptr);

// Mean pairwise Euclidean distance between per-speaker centroids.
double centroid_separation(const Matrix& points,
                           std::span<const std::uint32_t> speakers);

struct PcaResult {
  Matrix coords;      // N x 2
  Matrix components;  // d x 2, orthonormal columns
  Vector mean;

  // mean + coords * components^T
  Matrix reconstruct() const;
};

// Top two principal components. Each component's largest-magnitude loading is
// made positive.
PcaResult pca_2d(const Matrix& features);

struct TsneOptions {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double learning_rate = 200.0;
};

inline constexpr std::size_t kTsneMaxPoints = 5000;

// Exact O(N^2) t-SNE into two dimensions.
Matrix tsne_2d(const Matrix& features, std::uint64_t seed,
               const TsneOptions& options = {});

enum class ProjectionMethod { kPca, kTsne };

ProjectionMethod parse_projection_method(std::string_view name);

Matrix project_2d(const Matrix& features, ProjectionMethod method,
                  std::uint64_t seed, const TsneOptions& options = {});

// Header: x,y,senone,speaker
void write_projection_csv(const Matrix& coords, std::span<const std::uint32_t> senones,
                          std::span<const std::uint32_t> speakers,
                          const std::filesystem::path& path);

struct EvalReport {
  double senone_frame_accuracy = 0.0;
  double speaker_probe_accuracy = 0.0;
  double invariance_ratio = 0.0;
  std::map<std::uint32_t, double> per_speaker_accuracy;
  std::size_t n_frames = 0;
  std::vector<std::string> warnings;
};

// Deep features are taken at the model's feature boundary (depth n_h for
// single-stack models).
EvalReport evaluate(const ModelParams& params, const FrameBatch& batch,
                    std::size_t n_h, const ProbeConfig& probe, std::uint64_t seed);

std::string report_json(const EvalReport& report);
void write_report_json(const EvalReport& report, const std::filesystem::path& path);

}  // namespace sit

#endif  // SIT_EVALUATION_HPP_
