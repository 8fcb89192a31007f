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
#include "sit/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "bytes.hpp"
#include "json_io.hpp"
#include "sit/error.hpp"

namespace sit {

using detail::Json;
using detail::StrictObject;

namespace {

constexpr const char* kFormatTag = "sit-checkpoint";
constexpr int kFormatVersion = 1;

void append_stack_bytes(detail::ByteWriter& w, const Stack& stack) {
  for (const DenseLayer& l : stack) {
    for (double v : l.weights.data()) w.put_f64(v);
    for (double v : l.bias) w.put_f64(v);
  }
}

Json stack_json(const Stack& stack) {
  Json arr = Json::array();
  for (const DenseLayer& l : stack) {
    arr.push_back(Json{{"in_dim", l.weights.rows()},
                       {"out_dim", l.weights.cols()},
                       {"activation", std::string(activation_name(l.activation))},
                       {"weights", l.weights.values()},
                       {"bias", l.bias}});
  }
  return arr;
}

[[noreturn]] void malformed(const std::string& what) {
  fail(ErrorCode::kMalformedHeader, "checkpoint: " + what);
}

Stack read_stack(const Json* j, const char* group) {
  Stack stack;
  if (!j) malformed(std::string("missing group '") + group + "'");
  if (!j->is_array()) malformed(std::string("group '") + group + "' must be an array");
  for (std::size_t i = 0; i < j->size(); ++i) {
    StrictObject o((*j)[i], std::string("groups.") + group + "[" + std::to_string(i) + "]",
                   ErrorCode::kMalformedHeader);
    std::size_t in = 0, out = 0;
    std::string act;
    std::vector<double> weights, bias;
    o.get("in_dim", in);
    o.get("out_dim", out);
    o.get("activation", act);
    o.get("weights", weights);
    o.get("bias", bias);
    o.finish();
    if (in == 0 || out == 0 || weights.size() != in * out || bias.size() != out)
      malformed(std::string("layer ") + std::to_string(i) + " of '" + group +
                "' has inconsistent sizes");
    DenseLayer layer;
    try {
      layer.activation = parse_activation(act);
    } catch (const Error& e) {
      malformed(e.what());
    }
    layer.weights = Matrix(in, out, std::move(weights));
    layer.bias = std::move(bias);
    stack.push_back(std::move(layer));
  }
  return stack;
}

}  // namespace

std::uint32_t params_crc32(const ModelParams& params) {
  detail::ByteWriter w;
  append_stack_bytes(w, params.feature);
  append_stack_bytes(w, params.senone);
  append_stack_bytes(w, params.speaker);
  return detail::crc32(w.bytes());
}

std::string encode_checkpoint(const Checkpoint& c) {
  validate(c.params);
  Json j;
  j["format"] = kFormatTag;
  j["version"] = kFormatVersion;
  j["kind"] = c.kind == ModelKind::kSi ? "si" : "sit";
  j["vocab"] = Json{{"input_dim", c.params.input_dim()},
                    {"n_senones", c.params.n_senones},
                    {"n_speakers", c.params.n_speakers}};
  j["topology"] = detail::to_json(c.topology);
  j["hyper"] = detail::to_json(c.hyper);
  j["train_frame_accuracy"] =
      c.train_frame_accuracy ? Json(*c.train_frame_accuracy) : Json(nullptr);
  j["groups"] = Json{{"feature", stack_json(c.params.feature)},
                     {"senone", stack_json(c.params.senone)},
                     {"speaker", stack_json(c.params.speaker)}};
  j["payload_crc32"] = params_crc32(c.params);
  return j.dump();
}

Checkpoint decode_checkpoint(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Cut-off documents are the common case of a parse failure at the end.
    if (e.byte >= text.size()) fail(ErrorCode::kTruncated, "checkpoint is truncated");
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) malformed("top level must be an object");
  StrictObject o(j, "", ErrorCode::kMalformedHeader);
  std::string format, kind;
  int version = 0;
  o.get("format", format);
  o.get("version", version);
  if (format != kFormatTag) malformed("bad format tag '" + format + "'");
  if (version != kFormatVersion) malformed("unsupported version " + std::to_string(version));
  o.get("kind", kind);

  Checkpoint c;
  if (kind == "si") {
    c.kind = ModelKind::kSi;
  } else if (kind == "sit") {
    c.kind = ModelKind::kSit;
  } else {
    malformed("unknown model kind '" + kind + "'");
  }
  const Json* vocab = o.child("vocab");
  if (!vocab) malformed("missing vocab");
  std::size_t input_dim = 0;
  StrictObject v(*vocab, "vocab", ErrorCode::kMalformedHeader);
  v.get("input_dim", input_dim);
  v.get("n_senones", c.params.n_senones);
  v.get("n_speakers", c.params.n_speakers);
  v.finish();
  if (const Json* t = o.child("topology")) detail::read(*t, c.topology, ErrorCode::kMalformedHeader);
  if (const Json* h = o.child("hyper")) detail::read(*h, c.hyper, ErrorCode::kMalformedHeader);
  if (const Json* a = o.child("train_frame_accuracy"); a && !a->is_null()) {
    if (!a->is_number()) malformed("train_frame_accuracy must be a number");
    c.train_frame_accuracy = a->get<double>();
  }
  const Json* groups = o.child("groups");
  if (!groups) malformed("missing groups");
  StrictObject g(*groups, "groups", ErrorCode::kMalformedHeader);
  c.params.feature = read_stack(g.child("feature"), "feature");
  c.params.senone = read_stack(g.child("senone"), "senone");
  c.params.speaker = read_stack(g.child("speaker"), "speaker");
  g.finish();
  std::uint32_t crc = 0;
  if (!o.child("payload_crc32")) malformed("missing payload_crc32");
  o.get("payload_crc32", crc);
  o.finish();

  if (params_crc32(c.params) != crc)
    fail(ErrorCode::kChecksumMismatch, "checkpoint weight checksum mismatch");
  try {
    validate(c.params);
  } catch (const Error& e) {
    malformed(e.what());
  }
  if (c.params.input_dim() != input_dim) malformed("vocab.input_dim disagrees with weights");
  if ((c.kind == ModelKind::kSit) != c.params.is_split())
    malformed("model kind disagrees with its parameter groups");
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string text = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace sit
