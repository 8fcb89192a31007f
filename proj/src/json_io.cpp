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
#include "json_io.hpp"

#include <vector>

namespace sit::detail {

StrictObject::StrictObject(const Json& j, std::string path, ErrorCode code)
    : j_(j), path_(std::move(path)), code_(code) {
  if (!j_.is_object()) fail(code_, "'" + path_ + "' must be a JSON object");
  if (!path_.empty()) path_ += '.';
}

const Json* StrictObject::child(const char* key) {
  seen_.insert(key);
  auto it = j_.find(key);
  if (it == j_.end()) return nullptr;
  return &*it;
}

void StrictObject::invalid(const char* key, const std::string& why) const {
  fail(code_, "field '" + path_ + key + "' " + why);
}

void StrictObject::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it) {
    if (!seen_.count(it.key())) fail(code_, "unknown field '" + path_ + it.key() + "'");
  }
}

Json to_json(const SyntheticCorpusSpec& s) {
  return Json{{"n_senones", s.n_senones},
              {"n_speakers", s.n_speakers},
              {"n_test_speakers", s.n_test_speakers},
              {"base_dim", s.base_dim},
              {"frames_per_cell", s.frames_per_cell},
              {"speaker_shift_scale", s.speaker_shift_scale},
              {"speaker_warp_scale", s.speaker_warp_scale},
              {"noise_scale", s.noise_scale},
              {"speaker_rank", s.speaker_rank},
              {"splice_left", s.splice_left},
              {"splice_right", s.splice_right},
              {"seed", s.seed}};
}

Json to_json(const Topology& t) {
  return Json{{"hidden", t.hidden},
              {"speaker_hidden", t.speaker_hidden},
              {"activation", std::string(activation_name(t.activation))}};
}

Json to_json(const Hyperparams& h) {
  Json j{{"lambda", h.lambda},
         {"mu", h.mu},
         {"n_h", h.n_h},
         {"batch_size", h.batch_size},
         {"epochs", h.epochs},
         {"seed", h.seed},
         {"reduction", std::string(reduction_name(h.reduction))}};
  j["sit_mu"] = h.sit_mu ? Json(*h.sit_mu) : Json(nullptr);
  j["speaker_pretrain_epochs"] = h.speaker_pretrain_epochs;
  return j;
}

Json to_json(const AdaptConfig& a) {
  Json j{{"layers", std::vector<std::size_t>(a.layers_to_adapt.begin(),
                                             a.layers_to_adapt.end())}};
  j["mu_adapt"] = a.mu_adapt ? Json(*a.mu_adapt) : Json(nullptr);
  j["epochs"] = a.epochs;
  j["batch_size"] = a.batch_size;
  j["reduction"] = std::string(reduction_name(a.reduction));
  j["seed"] = a.seed;
  return j;
}

namespace {

template <typename Fn>
auto parse_enum(StrictObject& o, const char* key, const std::string& text, Fn fn) {
  try {
    return fn(text);
  } catch (const Error& e) {
    o.invalid(key, e.what());
  }
}

void read_optional_double(StrictObject& o, const Json& j, const char* key,
                          std::optional<double>& out) {
  const Json* v = o.child(key);
  (void)j;
  if (!v || v->is_null()) {
    if (v) out.reset();
    return;
  }
  if (!v->is_number()) o.invalid(key, "must be a number or null");
  out = v->get<double>();
}

}  // namespace

void read(const Json& j, SyntheticCorpusSpec& s, ErrorCode code) {
  StrictObject o(j, "corpus", code);
  o.get("n_senones", s.n_senones);
  o.get("n_speakers", s.n_speakers);
  o.get("n_test_speakers", s.n_test_speakers);
  o.get("base_dim", s.base_dim);
  o.get("frames_per_cell", s.frames_per_cell);
  o.get("speaker_shift_scale", s.speaker_shift_scale);
  o.get("speaker_warp_scale", s.speaker_warp_scale);
  o.get("noise_scale", s.noise_scale);
  o.get("speaker_rank", s.speaker_rank);
  o.get("splice_left", s.splice_left);
  o.get("splice_right", s.splice_right);
  o.get("seed", s.seed);
  o.finish();
}

void read(const Json& j, Topology& t, ErrorCode code) {
  StrictObject o(j, "topology", code);
  o.get("hidden", t.hidden);
  o.get("speaker_hidden", t.speaker_hidden);
  std::string act(activation_name(t.activation));
  o.get("activation", act);
  t.activation = parse_enum(o, "activation", act, parse_activation);
  o.finish();
}

void read(const Json& j, Hyperparams& h, ErrorCode code) {
  StrictObject o(j, "hyper", code);
  o.get("lambda", h.lambda);
  o.get("mu", h.mu);
  o.get("n_h", h.n_h);
  o.get("batch_size", h.batch_size);
  o.get("epochs", h.epochs);
  o.get("seed", h.seed);
  std::string red(reduction_name(h.reduction));
  o.get("reduction", red);
  h.reduction = parse_enum(o, "reduction", red, parse_reduction);
  read_optional_double(o, j, "sit_mu", h.sit_mu);
  o.get("speaker_pretrain_epochs", h.speaker_pretrain_epochs);
  o.finish();
}

void read(const Json& j, AdaptConfig& a, ErrorCode code) {
  StrictObject o(j, "adapt", code);
  std::vector<std::size_t> layers(a.layers_to_adapt.begin(), a.layers_to_adapt.end());
  o.get("layers", layers);
  a.layers_to_adapt = {layers.begin(), layers.end()};
  read_optional_double(o, j, "mu_adapt", a.mu_adapt);
  o.get("epochs", a.epochs);
  o.get("batch_size", a.batch_size);
  std::string red(reduction_name(a.reduction));
  o.get("reduction", red);
  a.reduction = parse_enum(o, "reduction", red, parse_reduction);
  o.get("seed", a.seed);
  o.finish();
}

}  // namespace sit::detail
