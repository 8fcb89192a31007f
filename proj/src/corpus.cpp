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
#include "sit/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>

#include "bytes.hpp"
#include "sit/error.hpp"

namespace sit {

namespace detail {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

void validate(const SyntheticCorpusSpec& spec) {
  auto require_count = [](std::size_t v, const char* name) {
    if (v < 1) fail(ErrorCode::kConfig, std::string("corpus.") + name + " must be >= 1");
  };
  require_count(spec.n_senones, "n_senones");
  require_count(spec.n_speakers, "n_speakers");
  require_count(spec.n_test_speakers, "n_test_speakers");
  require_count(spec.base_dim, "base_dim");
  require_count(spec.frames_per_cell, "frames_per_cell");
  auto require_scale = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(ErrorCode::kConfig, std::string("corpus.") + name + " must be >= 0");
  };
  require_scale(spec.speaker_shift_scale, "speaker_shift_scale");
  require_scale(spec.speaker_warp_scale, "speaker_warp_scale");
  require_scale(spec.noise_scale, "noise_scale");
  if (spec.speaker_rank > spec.base_dim)
    fail(ErrorCode::kConfig, "corpus.speaker_rank must be <= base_dim");
}

GeneratorParams generator_params(const SyntheticCorpusSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t d = spec.base_dim;
  GeneratorParams g;
  g.prototypes = Matrix(spec.n_senones, d);
  for (double& v : g.prototypes.data()) v = normal(rng);
  const std::size_t rank = spec.speaker_rank;
  Matrix basis(d, rank);
  for (double& v : basis.data()) v = normal(rng);
  for (std::size_t a = 0; a < spec.total_speakers(); ++a) {
    Vector shift(d);
    if (rank == 0) {
      for (double& v : shift) v = normal(rng);
    } else {
      // Unit-variance entries, same expected norm as the full-rank draw.
      Vector z(rank);
      for (double& v : z) v = normal(rng) / std::sqrt(static_cast<double>(rank));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < rank; ++k) shift[i] += basis(i, k) * z[k];
    }
    Matrix warp(d, d);
    for (double& v : warp.data()) v = normal(rng);
    g.shifts.push_back(std::move(shift));
    g.warps.push_back(std::move(warp));
  }
  return g;
}

RawCorpus gen_corpus(const SyntheticCorpusSpec& spec, Partition partition) {
  const GeneratorParams g = generator_params(spec);
  const std::size_t d = spec.base_dim;
  const bool train = partition == Partition::kTrain;
  const std::size_t first = train ? 0 : spec.n_speakers;
  const std::size_t count = train ? spec.n_speakers : spec.n_test_speakers;

  std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(train ? 0x5117 : 0x7e57)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  RawCorpus out;
  const std::size_t n = count * spec.n_senones * spec.frames_per_cell;
  out.frames = Matrix(n, d);
  out.senones.reserve(n);
  out.speakers.reserve(n);
  std::size_t row = 0;
  Vector cell_mean(d);
  for (std::size_t a = first; a < first + count; ++a) {
    for (std::size_t q = 0; q < spec.n_senones; ++q) {
      auto proto = g.prototypes.row(q);
      for (std::size_t i = 0; i < d; ++i) {
        double warped = 0.0;
        for (std::size_t k = 0; k < d; ++k) warped += g.warps[a](i, k) * proto[k];
        cell_mean[i] = proto[i] + spec.speaker_warp_scale * warped +
                       spec.speaker_shift_scale * g.shifts[a][i];
      }
      for (std::size_t t = 0; t < spec.frames_per_cell; ++t, ++row) {
        auto x = out.frames.row(row);
        for (std::size_t i = 0; i < d; ++i)
          x[i] = cell_mean[i] + spec.noise_scale * normal(rng);
        out.senones.push_back(static_cast<std::uint32_t>(q));
        out.speakers.push_back(static_cast<std::uint32_t>(a));
      }
      out.segment_lengths.push_back(spec.frames_per_cell);
    }
  }
  return out;
}

Matrix splice(const Matrix& frames, std::size_t left, std::size_t right) {
  const std::size_t n = frames.rows();
  const std::size_t d = frames.cols();
  const std::size_t width = left + right + 1;
  Matrix out(n, width * d);
  for (std::size_t i = 0; i < n; ++i) {
    auto o = out.row(i);
    for (std::size_t c = 0; c < width; ++c) {
      const auto offset = static_cast<std::ptrdiff_t>(i + c) - static_cast<std::ptrdiff_t>(left);
      const auto src = static_cast<std::size_t>(
          std::clamp<std::ptrdiff_t>(offset, 0, static_cast<std::ptrdiff_t>(n) - 1));
      auto r = frames.row(src);
      std::copy(r.begin(), r.end(), o.begin() + static_cast<std::ptrdiff_t>(c * d));
    }
  }
  return out;
}

Matrix splice_segments(const Matrix& frames, std::span<const std::size_t> lengths,
                       std::size_t left, std::size_t right) {
  const std::size_t width = left + right + 1;
  Matrix out(frames.rows(), width * frames.cols());
  std::size_t start = 0;
  for (std::size_t len : lengths) {
    if (start + len > frames.rows())
      fail(ErrorCode::kArgument, "segment lengths exceed the frame count");
    std::vector<std::size_t> rows(len);
    for (std::size_t i = 0; i < len; ++i) rows[i] = start + i;
    const Matrix seg = splice(frames.gather_rows(rows), left, right);
    for (std::size_t i = 0; i < len; ++i) {
      auto r = seg.row(i);
      std::copy(r.begin(), r.end(), out.row(start + i).begin());
    }
    start += len;
  }
  if (start != frames.rows())
    fail(ErrorCode::kArgument, "segment lengths do not cover every frame");
  return out;
}

Matrix normalize(const Matrix& frames, NormStats* stats) {
  if (frames.rows() < 2)
    fail(ErrorCode::kArgument, "normalization needs at least two frames");
  const std::size_t n = frames.rows();
  const std::size_t d = frames.cols();
  NormStats s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = frames.row(i);
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = frames.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = r[j] - s.mean[j];
      s.stddev[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double var = s.stddev[j] / static_cast<double>(n);
    s.stddev[j] = std::sqrt(var);
    if (s.stddev[j] == 0.0) {
      s.stddev[j] = kNormEpsilon;
      s.warnings.push_back("dimension " + std::to_string(j) +
                           " has zero variance; using epsilon");
    }
  }
  Matrix out = apply_normalization(frames, s);
  if (stats) *stats = std::move(s);
  return out;
}

Matrix apply_normalization(const Matrix& frames, const NormStats& stats) {
  if (frames.cols() != stats.mean.size() || frames.cols() != stats.stddev.size()) {
    fail(ErrorCode::kDimension,
         "normalization stats of width " + std::to_string(stats.mean.size()) +
             " applied to frames " + frames.shape_string());
  }
  Matrix out = frames;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j)
      r[j] = (r[j] - stats.mean[j]) / stats.stddev[j];
  }
  return out;
}

FrameBatch FrameBatch::select(std::span<const std::size_t> rows) const {
  FrameBatch out;
  out.frames = frames.gather_rows(rows);
  out.senones.reserve(rows.size());
  out.speakers.reserve(rows.size());
  for (std::size_t r : rows) {
    out.senones.push_back(senones[r]);
    out.speakers.push_back(speakers[r]);
  }
  out.n_senones = n_senones;
  out.n_speakers = n_speakers;
  out.stats = stats;
  return out;
}

FrameBatch FrameBatch::speaker_subset(std::uint32_t speaker) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < speakers.size(); ++i)
    if (speakers[i] == speaker) rows.push_back(i);
  return select(rows);
}

std::vector<std::uint32_t> FrameBatch::distinct_speakers() const {
  std::set<std::uint32_t> s(speakers.begin(), speakers.end());
  return {s.begin(), s.end()};
}

void validate(const FrameBatch& batch) {
  const std::size_t n = batch.frames.rows();
  if (batch.senones.size() != n || batch.speakers.size() != n) {
    fail(ErrorCode::kDimension, "label sequences are not aligned with " +
                                    std::to_string(n) + " frames");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.senones[i] >= batch.n_senones || batch.speakers[i] >= batch.n_speakers) {
      fail(ErrorCode::kArgument, "frame " + std::to_string(i) +
                                     " has a label outside the vocabulary");
    }
  }
}

namespace {

FrameBatch to_batch(const RawCorpus& raw, const SyntheticCorpusSpec& spec) {
  FrameBatch b;
  b.frames = splice_segments(raw.frames, raw.segment_lengths, spec.splice_left,
                             spec.splice_right);
  b.senones = raw.senones;
  b.speakers = raw.speakers;
  b.n_senones = static_cast<std::uint32_t>(spec.n_senones);
  b.n_speakers = static_cast<std::uint32_t>(spec.total_speakers());
  return b;
}

}  // namespace

CorpusPair build_corpora(const SyntheticCorpusSpec& spec) {
  CorpusPair out;
  out.train = to_batch(gen_corpus(spec, Partition::kTrain), spec);
  out.test = to_batch(gen_corpus(spec, Partition::kTest), spec);
  out.train.frames = normalize(out.train.frames, &out.train.stats);
  out.test.frames = apply_normalization(out.test.frames, out.train.stats);
  out.test.stats = out.train.stats;
  return out;
}

std::vector<std::uint8_t> encode_corpus(const FrameBatch& batch) {
  validate(batch);
  detail::ByteWriter w;
  w.put_raw("SITC", 4);
  w.put_u8(kCorpusFormatVersion);
  w.put_u32(static_cast<std::uint32_t>(batch.size()));
  w.put_u32(static_cast<std::uint32_t>(batch.dim()));
  w.put_u32(batch.n_senones);
  w.put_u32(batch.n_speakers);
  const std::size_t payload_start = w.size();
  for (double v : batch.frames.data()) w.put_f64(v);
  for (std::uint32_t v : batch.senones) w.put_u32(v);
  for (std::uint32_t v : batch.speakers) w.put_u32(v);
  const std::uint32_t crc = detail::crc32(
      std::span<const std::uint8_t>(w.bytes()).subspan(payload_start));
  w.put_u32(crc);
  return std::move(w.bytes());
}

FrameBatch decode_corpus(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeaderSize = 4 + 1 + 4 * 4;
  if (bytes.size() < kHeaderSize)
    fail(ErrorCode::kMalformedHeader, "corpus file shorter than its header");
  if (std::memcmp(bytes.data(), "SITC", 4) != 0)
    fail(ErrorCode::kMalformedHeader, "bad magic; not a SITC corpus file");
  detail::ByteReader r(bytes.subspan(4));
  const std::uint8_t version = r.get_u8();
  if (version != kCorpusFormatVersion) {
    fail(ErrorCode::kMalformedHeader,
         "unsupported SITC version " + std::to_string(version));
  }
  FrameBatch b;
  const std::uint32_t n = r.get_u32();
  const std::uint32_t d = r.get_u32();
  b.n_senones = r.get_u32();
  b.n_speakers = r.get_u32();
  if (n == 0) fail(ErrorCode::kMalformedHeader, "corpus holds zero frames");
  if (d == 0 || b.n_senones == 0 || b.n_speakers == 0)
    fail(ErrorCode::kMalformedHeader, "corpus header has a zero dimension");

  const std::uint64_t payload =
      std::uint64_t{n} * d * 8 + std::uint64_t{n} * 4 * 2;
  if (r.remaining() < payload + 4) {
    fail(ErrorCode::kTruncated, "corpus payload truncated: expected " +
                                    std::to_string(payload + 4) + " bytes, found " +
                                    std::to_string(r.remaining()));
  }
  if (r.remaining() > payload + 4)
    fail(ErrorCode::kMalformedHeader, "trailing bytes after corpus payload");
  const std::uint32_t crc = detail::crc32(bytes.subspan(kHeaderSize, payload));

  std::vector<double> frames(std::size_t{n} * d);
  r.get_raw(frames.data(), frames.size() * sizeof(double));
  b.frames = Matrix(n, d, std::move(frames));
  b.senones.resize(n);
  b.speakers.resize(n);
  r.get_raw(b.senones.data(), n * sizeof(std::uint32_t));
  r.get_raw(b.speakers.data(), n * sizeof(std::uint32_t));
  if (r.get_u32() != crc) fail(ErrorCode::kChecksumMismatch, "corpus CRC32 mismatch");
  try {
    validate(b);
  } catch (const Error& e) {
    fail(ErrorCode::kMalformedHeader, e.what());
  }
  return b;
}

void save_corpus(const FrameBatch& batch, const std::filesystem::path& path) {
  const auto bytes = encode_corpus(batch);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

FrameBatch load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_corpus(bytes);
}

void export_corpus_csv(const FrameBatch& batch, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  for (std::size_t j = 0; j < batch.dim(); ++j) out << 'f' << j << ',';
  out << "senone,speaker\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (double v : batch.frames.row(i)) out << v << ',';
    out << batch.senones[i] << ',' << batch.speakers[i] << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace sit
