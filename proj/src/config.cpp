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
#include "sit/config.hpp"

#include <fstream>
#include <sstream>

#include "json_io.hpp"
#include "sit/error.hpp"

namespace sit {

using detail::Json;
using detail::StrictObject;

void validate(const RunConfig& c) {
  validate(c.corpus);
  if (c.topology.hidden.size() < 2)
    fail(ErrorCode::kConfig, "topology.hidden needs at least two layers");
  for (std::size_t w : c.topology.hidden)
    if (w < 1) fail(ErrorCode::kConfig, "topology.hidden widths must be >= 1");
  for (std::size_t w : c.topology.speaker_hidden)
    if (w < 1) fail(ErrorCode::kConfig, "topology.speaker_hidden widths must be >= 1");
  try {
    validate(c.hyper, c.topology.hidden.size());
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, std::string("hyper: ") + e.what());
  }
  if (c.hyper.epochs < 1) fail(ErrorCode::kConfig, "hyper.epochs must be >= 1");
  const std::size_t depth = c.topology.hidden.size() + 1;
  for (std::size_t l : c.adapt.layers_to_adapt) {
    if (l >= depth)
      fail(ErrorCode::kConfig, "adapt.layers index " + std::to_string(l) + " out of range");
  }
  if (c.adapt.mu_adapt && !(*c.adapt.mu_adapt > 0.0))
    fail(ErrorCode::kConfig, "adapt.mu_adapt must be > 0");
  if (c.adapt.batch_size < 1) fail(ErrorCode::kConfig, "adapt.batch_size must be >= 1");
  const ProbeConfig& p = c.eval.probe;
  if (!(p.train_fraction > 0.0 && p.train_fraction < 1.0))
    fail(ErrorCode::kConfig, "eval.probe.train_fraction must lie in (0, 1)");
  if (!(p.mu > 0.0)) fail(ErrorCode::kConfig, "eval.probe.mu must be > 0");
  if (p.batch_size < 1) fail(ErrorCode::kConfig, "eval.probe.batch_size must be >= 1");
  if (!(c.eval.tsne.perplexity > 0.0))
    fail(ErrorCode::kConfig, "eval.tsne.perplexity must be > 0");
  if (c.eval.projection_senone >= c.corpus.n_senones)
    fail(ErrorCode::kConfig, "eval.projection_senone outside the senone vocabulary");
  if (c.eval.projection_speakers < 1)
    fail(ErrorCode::kConfig, "eval.projection_speakers must be >= 1");
}

namespace {

void read_eval(const Json& j, EvalConfig& e) {
  StrictObject o(j, "eval", ErrorCode::kConfig);
  if (const Json* pj = o.child("probe")) {
    StrictObject p(*pj, "eval.probe", ErrorCode::kConfig);
    p.get("hidden", e.probe.hidden);
    std::string act(activation_name(e.probe.activation));
    p.get("activation", act);
    try {
      e.probe.activation = parse_activation(act);
    } catch (const Error& err) {
      p.invalid("activation", err.what());
    }
    p.get("epochs", e.probe.epochs);
    p.get("mu", e.probe.mu);
    p.get("batch_size", e.probe.batch_size);
    p.get("train_fraction", e.probe.train_fraction);
    p.finish();
  }
  if (const Json* tj = o.child("tsne")) {
    StrictObject t(*tj, "eval.tsne", ErrorCode::kConfig);
    t.get("perplexity", e.tsne.perplexity);
    t.get("iterations", e.tsne.iterations);
    t.get("early_exaggeration", e.tsne.early_exaggeration);
    t.get("exaggeration_iterations", e.tsne.exaggeration_iterations);
    t.get("learning_rate", e.tsne.learning_rate);
    t.finish();
  }
  o.get("projection_senone", e.projection_senone);
  o.get("projection_speakers", e.projection_speakers);
  o.get("seed", e.seed);
  o.finish();
}

void read_paths(const Json& j, PathsConfig& p) {
  StrictObject o(j, "paths", ErrorCode::kConfig);
  o.get("out_dir", p.out_dir);
  o.get("train_corpus", p.train_corpus);
  o.get("test_corpus", p.test_corpus);
  o.get("si_checkpoint", p.si_checkpoint);
  o.get("checkpoint_interval", p.checkpoint_interval);
  o.finish();
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  StrictObject o(j, "", ErrorCode::kConfig);
  if (const Json* v = o.child("corpus")) detail::read(*v, c.corpus, ErrorCode::kConfig);
  if (const Json* v = o.child("topology")) detail::read(*v, c.topology, ErrorCode::kConfig);
  if (const Json* v = o.child("hyper")) detail::read(*v, c.hyper, ErrorCode::kConfig);
  if (const Json* v = o.child("adapt")) detail::read(*v, c.adapt, ErrorCode::kConfig);
  if (const Json* v = o.child("eval")) read_eval(*v, c.eval);
  if (const Json* v = o.child("paths")) read_paths(*v, c.paths);
  o.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_json(const RunConfig& c) {
  Json j;
  j["corpus"] = detail::to_json(c.corpus);
  j["topology"] = detail::to_json(c.topology);
  j["hyper"] = detail::to_json(c.hyper);
  j["adapt"] = detail::to_json(c.adapt);
  j["eval"] = Json{
      {"probe",
       {{"hidden", c.eval.probe.hidden},
        {"activation", std::string(activation_name(c.eval.probe.activation))},
        {"epochs", c.eval.probe.epochs},
        {"mu", c.eval.probe.mu},
        {"batch_size", c.eval.probe.batch_size},
        {"train_fraction", c.eval.probe.train_fraction}}},
      {"tsne",
       {{"perplexity", c.eval.tsne.perplexity},
        {"iterations", c.eval.tsne.iterations},
        {"early_exaggeration", c.eval.tsne.early_exaggeration},
        {"exaggeration_iterations", c.eval.tsne.exaggeration_iterations},
        {"learning_rate", c.eval.tsne.learning_rate}}},
      {"projection_senone", c.eval.projection_senone},
      {"projection_speakers", c.eval.projection_speakers},
      {"seed", c.eval.seed}};
  j["paths"] = Json{{"out_dir", c.paths.out_dir},
                    {"train_corpus", c.paths.train_corpus},
                    {"test_corpus", c.paths.test_corpus},
                    {"si_checkpoint", c.paths.si_checkpoint},
                    {"checkpoint_interval", c.paths.checkpoint_interval}};
  return j.dump(2);
}

void override_seed(RunConfig& c, std::uint64_t seed) {
  c.corpus.seed = seed;
  c.hyper.seed = seed;
  c.adapt.seed = seed;
  c.eval.seed = seed;
}

}  // namespace sit
