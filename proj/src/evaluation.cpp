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
#include "sit/evaluation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"

#include "sit/error.hpp"
#include "sit/trainer.hpp"

namespace sit {

namespace {

std::vector<std::uint32_t> predict(const ModelParams& params, const Matrix& x) {
  return argmax_rows(stack_forward(
      params.senone, stack_forward(params.feature, x)));
}

}  // namespace

double frame_accuracy(const ModelParams& params, const FrameBatch& batch) {
  if (batch.size() == 0) fail(ErrorCode::kArgument, "frame accuracy of an empty batch");
  const auto predicted = predict(params, batch.frames);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == batch.senones[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

std::map<std::uint32_t, double> per_speaker_accuracy(const ModelParams& params,
                                                     const FrameBatch& batch) {
  if (batch.size() == 0) fail(ErrorCode::kArgument, "frame accuracy of an empty batch");
  const auto predicted = predict(params, batch.frames);
  std::map<std::uint32_t, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    auto& [correct, total] = counts[batch.speakers[i]];
    correct += predicted[i] == batch.senones[i];
    ++total;
  }
  std::map<std::uint32_t, double> out;
  for (const auto& [speaker, c] : counts)
    out[speaker] = static_cast<double>(c.first) / static_cast<double>(c.second);
  return out;
}

ProbeResult speaker_probe(const Matrix& features,
                          std::span<const std::uint32_t> speakers,
                          const ProbeConfig& config, std::uint64_t seed) {
  if (speakers.size() != features.rows())
    fail(ErrorCode::kDimension, "speaker labels are not aligned with features");
  const std::set<std::uint32_t> distinct(speakers.begin(), speakers.end());
  if (distinct.size() < 2)
    fail(ErrorCode::kArgument, "speaker probe needs at least two speakers");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0))
    fail(ErrorCode::kArgument, "probe train fraction must lie in (0, 1)");

  std::map<std::uint32_t, std::uint32_t> dense;
  for (std::uint32_t s : distinct)
    dense.emplace(s, static_cast<std::uint32_t>(dense.size()));

  std::vector<std::size_t> order(features.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::round(config.train_fraction * static_cast<double>(order.size())));
  if (n_train == 0 || n_train == order.size())
    fail(ErrorCode::kArgument, "too few frames to split for the speaker probe");

  auto make_batch = [&](std::span<const std::size_t> rows) {
    FrameBatch b;
    b.frames = features.gather_rows(rows);
    for (std::size_t r : rows) {
      b.senones.push_back(dense.at(speakers[r]));
      b.speakers.push_back(0);
    }
    b.n_senones = static_cast<std::uint32_t>(dense.size());
    b.n_speakers = 1;
    return b;
  };
  const FrameBatch train = make_batch(std::span(order).first(n_train));
  const FrameBatch held_out = make_batch(std::span(order).subspan(n_train));

  Topology topology;
  topology.hidden = config.hidden;
  topology.activation = config.activation;
  const ModelParams init =
      init_si_model(features.cols(), topology, dense.size(), seed + 1);
  Hyperparams hyper;
  hyper.mu = config.mu;
  hyper.epochs = config.epochs;
  hyper.batch_size = config.batch_size;
  hyper.reduction = Reduction::kMean;
  hyper.seed = seed + 2;
  const ModelParams probe = train_si(train, init, hyper);
  return {frame_accuracy(probe, held_out), 1.0 / static_cast<double>(dense.size())};
}

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double mean_pairwise_distance(const std::vector<Vector>& points) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j, ++pairs)
      sum += distance(points[i], points[j]);
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

}  // namespace

double invariance_ratio(const Matrix& features, std::span<const std::uint32_t> senones,
                        std::span<const std::uint32_t> speakers,
                        std::vector<std::string>* warnings) {
  if (senones.size() != features.rows() || speakers.size() != features.rows())
    fail(ErrorCode::kDimension, "labels are not aligned with features");
  const std::size_t d = features.cols();
  // senone -> speaker -> row indices
  std::map<std::uint32_t, std::map<std::uint32_t, std::vector<std::size_t>>> cells;
  for (std::size_t i = 0; i < features.rows(); ++i)
    cells[senones[i]][speakers[i]].push_back(i);

  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& [senone, by_speaker] : cells) {
    std::vector<Vector> centroids;
    double spread_sum = 0.0;
    for (const auto& [speaker, rows] : by_speaker) {
      if (rows.size() < 2) {
        warn("cell (senone " + std::to_string(senone) + ", speaker " +
             std::to_string(speaker) + ") has fewer than two frames; skipped");
        continue;
      }
      Vector c(d, 0.0);
      for (std::size_t r : rows) {
        auto f = features.row(r);
        for (std::size_t j = 0; j < d; ++j) c[j] += f[j];
      }
      for (double& v : c) v /= static_cast<double>(rows.size());
      double sq = 0.0;
      for (std::size_t r : rows) {
        const double dist = distance(features.row(r), c);
        sq += dist * dist;
      }
      spread_sum += std::sqrt(sq / static_cast<double>(rows.size()));
      centroids.push_back(std::move(c));
    }
    if (centroids.size() < 2) {
      warn("senone " + std::to_string(senone) + " has fewer than two usable speakers; skipped");
      continue;
    }
    const double between = mean_pairwise_distance(centroids);
    const double within = spread_sum / static_cast<double>(centroids.size());
    if (within == 0.0) {
      if (between != 0.0) {
        warn("senone " + std::to_string(senone) + " has zero within-cell spread; skipped");
        continue;
      }
      ++used;  // identical features everywhere contribute a ratio of zero
      continue;
    }
    sum += between / within;
    ++used;
  }
  return used == 0 ? 0.0 : sum / static_cast<double>(used);
}

double centroid_separation(const Matrix& points,
                           std::span<const std::uint32_t> speakers) {
  if (speakers.size() != points.rows())
    fail(ErrorCode::kDimension, "speaker labels are not aligned with points");
  std::map<std::uint32_t, std::pair<Vector, std::size_t>> acc;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto& [sum, count] = acc[speakers[i]];
    if (sum.empty()) sum.assign(points.cols(), 0.0);
    auto r = points.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) sum[j] += r[j];
    ++count;
  }
  std::vector<Vector> centroids;
  for (auto& [speaker, entry] : acc) {
    for (double& v : entry.first) v /= static_cast<double>(entry.second);
    centroids.push_back(entry.first);
  }
  return mean_pairwise_distance(centroids);
}

Matrix PcaResult::reconstruct() const {
  Matrix out = matmul_nt(coords, components);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += mean[j];
  }
  return out;
}

PcaResult pca_2d(const Matrix& features) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n < 3) fail(ErrorCode::kArgument, "projection needs at least three points");
  if (d < 2) fail(ErrorCode::kArgument, "PCA to two dimensions needs d >= 2");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features(i, j);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::kNumeric, "eigendecomposition failed in PCA");
  // Eigenvalues come back in ascending order.
  Eigen::MatrixXd top(static_cast<Eigen::Index>(d), 2);
  top.col(0) = solver.eigenvectors().col(static_cast<Eigen::Index>(d) - 1);
  top.col(1) = solver.eigenvectors().col(static_cast<Eigen::Index>(d) - 2);
  for (Eigen::Index c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    top.col(c).cwiseAbs().maxCoeff(&arg);
    if (top(arg, c) < 0) top.col(c) *= -1.0;
  }
  const Eigen::MatrixXd coords = x * top;

  PcaResult out;
  out.coords = Matrix(n, 2);
  out.components = Matrix(d, 2);
  out.mean.assign(mean.data(), mean.data() + d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 2; ++c)
      out.coords(i, c) = coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t c = 0; c < 2; ++c)
      out.components(j, c) = top(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
  return out;
}

namespace {

// Row-conditional affinities with per-point precision found by bisection so
// that each row's entropy matches log(perplexity).
Matrix conditional_affinities(const Matrix& sq_dist, double perplexity) {
  const std::size_t n = sq_dist.rows();
  const double target = std::log(perplexity);
  Matrix p(n, n);
  Vector row(n);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0, lo = -INFINITY, hi = INFINITY;
    for (int iter = 0; iter < 100; ++iter) {
      double sum = 0.0;
      // Subtract the smallest off-diagonal distance for stability.
      double dmin = INFINITY;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) dmin = std::min(dmin, sq_dist(i, j));
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = j == i ? 0.0 : std::exp(-beta * (sq_dist(i, j) - dmin));
        sum += row[j];
      }
      double weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) weighted += row[j] * (sq_dist(i, j) - dmin);
      const double entropy = std::log(sum) + beta * weighted / sum;
      for (std::size_t j = 0; j < n; ++j) p(i, j) = row[j] / sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = std::isinf(lo) ? beta / 2.0 : (beta + lo) / 2.0;
      }
    }
  }
  return p;
}

}  // namespace

Matrix tsne_2d(const Matrix& features, std::uint64_t seed, const TsneOptions& options) {
  const std::size_t n = features.rows();
  if (n < 3) fail(ErrorCode::kArgument, "projection needs at least three points");
  if (n > kTsneMaxPoints) {
    fail(ErrorCode::kArgument,
         "exact t-SNE supports at most " + std::to_string(kTsneMaxPoints) +
             " points; subsample the input (got " + std::to_string(n) + ")");
  }
  if (!(options.perplexity > 0.0))
    fail(ErrorCode::kArgument, "perplexity must be > 0");
  const double perplexity =
      std::min(options.perplexity, static_cast<double>(n - 1) / 3.0);

  Matrix sq(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dd = distance(features.row(i), features.row(j));
      sq(i, j) = sq(j, i) = dd * dd;
    }
  const Matrix cond = conditional_affinities(sq, perplexity);
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      p(i, j) = std::max((cond(i, j) + cond(j, i)) / (2.0 * static_cast<double>(n)), 1e-12);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1e-4);
  Matrix y(n, 2);
  for (double& v : y.data()) v = normal(rng);
  Matrix velocity(n, 2);
  Matrix gains(n, 2, 1.0);
  Matrix num(n, n);
  Matrix grad(n, 2);

  for (std::size_t iter = 0; iter < options.iterations; ++iter) {
    const bool exaggerate = iter < options.exaggeration_iterations;
    const double exag = exaggerate ? options.early_exaggeration : 1.0;
    const double momentum = exaggerate ? 0.5 : 0.8;

    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        num(i, j) = num(j, i) = q;
        z += 2.0 * q;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double q = std::max(num(i, j) / z, 1e-12);
        const double m = (exag * p(i, j) - q) * num(i, j);
        gx += m * (y(i, 0) - y(j, 0));
        gy += m * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    for (std::size_t k = 0; k < y.size(); ++k) {
      double& g = gains.data()[k];
      const double gr = grad.data()[k];
      double& v = velocity.data()[k];
      g = (gr > 0.0) != (v > 0.0) ? g + 0.2 : g * 0.8;
      g = std::max(g, 0.01);
      v = momentum * v - options.learning_rate * g * gr;
      y.data()[k] += v;
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += y(i, c);
      m /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y(i, c) -= m;
    }
  }
  if (!y.all_finite()) fail(ErrorCode::kNumeric, "t-SNE produced non-finite coordinates");
  return y;
}

ProjectionMethod parse_projection_method(std::string_view name) {
  if (name == "pca") return ProjectionMethod::kPca;
  if (name == "tsne") return ProjectionMethod::kTsne;
  fail(ErrorCode::kArgument, "unknown projection method '" + std::string(name) + "'");
}

Matrix project_2d(const Matrix& features, ProjectionMethod method,
                  std::uint64_t seed, const TsneOptions& options) {
  if (method == ProjectionMethod::kPca) return pca_2d(features).coords;
  return tsne_2d(features, seed, options);
}

void write_projection_csv(const Matrix& coords, std::span<const std::uint32_t> senones,
                          std::span<const std::uint32_t> speakers,
                          const std::filesystem::path& path) {
  if (coords.cols() != 2 || senones.size() != coords.rows() ||
      speakers.size() != coords.rows()) {
    fail(ErrorCode::kDimension, "projection and labels disagree in shape");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << std::setprecision(17) << "x,y,senone,speaker\n";
  for (std::size_t i = 0; i < coords.rows(); ++i)
    out << coords(i, 0) << ',' << coords(i, 1) << ',' << senones[i] << ','
        << speakers[i] << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

EvalReport evaluate(const ModelParams& params, const FrameBatch& batch,
                    std::size_t n_h, const ProbeConfig& probe, std::uint64_t seed) {
  validate(params);
  if (batch.size() == 0) fail(ErrorCode::kArgument, "evaluation batch is empty");
  if (batch.dim() != params.input_dim()) {
    fail(ErrorCode::kMismatch, "corpus frame width " + std::to_string(batch.dim()) +
                                   " does not match model input width " +
                                   std::to_string(params.input_dim()));
  }
  if (batch.n_senones != params.n_senones) {
    fail(ErrorCode::kMismatch, "corpus senone vocabulary " +
                                   std::to_string(batch.n_senones) +
                                   " does not match model output " +
                                   std::to_string(params.n_senones));
  }
  EvalReport report;
  report.n_frames = batch.size();
  report.senone_frame_accuracy = frame_accuracy(params, batch);
  report.per_speaker_accuracy = per_speaker_accuracy(params, batch);
  const Matrix features = deep_features(params, batch.frames, n_h);
  report.invariance_ratio =
      invariance_ratio(features, batch.senones, batch.speakers, &report.warnings);
  if (batch.distinct_speakers().size() >= 2) {
    report.speaker_probe_accuracy =
        speaker_probe(features, batch.speakers, probe, seed).accuracy;
  } else {
    report.warnings.push_back("single speaker in batch; speaker probe skipped");
  }
  return report;
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["metric_note"] = "frame accuracy replaces word error rate";
  j["n_frames"] = report.n_frames;
  j["senone_frame_accuracy"] = report.senone_frame_accuracy;
  j["speaker_probe_accuracy"] = report.speaker_probe_accuracy;
  j["invariance_ratio"] = report.invariance_ratio;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& [speaker, acc] : report.per_speaker_accuracy)
    per[std::to_string(speaker)] = acc;
  j["per_speaker_accuracy"] = per;
  j["warnings"] = report.warnings;
  return j.dump(2);
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << report_json(report) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace sit
