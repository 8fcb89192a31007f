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
#ifndef SIT_SRC_JSON_IO_HPP_
#define SIT_SRC_JSON_IO_HPP_

#include <set>
#include <string>
#include <type_traits>

#include "json.hpp"
#include "sit/adaptation.hpp"
#include "sit/config.hpp"
#include "sit/error.hpp"
#include "sit/corpus.hpp"
#include "sit/model.hpp"

namespace sit::detail {

using Json = nlohmann::ordered_json;

// Reads optional keys of one JSON object and rejects keys nobody asked for.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string path, ErrorCode code);

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned())
        fail(code_, "field '" + path_ + key + "' must be a non-negative integer");
    }
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(code_, "field '" + path_ + key + "' has the wrong type");
    }
  }

  // Sub-object, or nullptr when absent.
  const Json* child(const char* key);
  [[noreturn]] void invalid(const char* key, const std::string& why) const;
  void finish() const;
  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  ErrorCode code_;
  std::set<std::string> seen_;
};

Json to_json(const SyntheticCorpusSpec& spec);
Json to_json(const Topology& topology);
Json to_json(const Hyperparams& hyper);
Json to_json(const AdaptConfig& adapt);

void read(const Json& j, SyntheticCorpusSpec& spec, ErrorCode code);
void read(const Json& j, Topology& topology, ErrorCode code);
void read(const Json& j, Hyperparams& hyper, ErrorCode code);
void read(const Json& j, AdaptConfig& adapt, ErrorCode code);

}  // namespace sit::detail

#endif  // SIT_SRC_JSON_IO_HPP_
