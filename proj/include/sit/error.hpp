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
#ifndef SIT_ERROR_HPP_
#define SIT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sit {

// Every failure raised by the library carries one of these codes. The C API
// maps them one-to-one onto sit_status values.
enum class ErrorCode {
  kArgument = 1,
  kDimension,
  kNumeric,
  kDivergence,
  kConfig,
  kIo,
  kMalformedHeader,
  kTruncated,
  kChecksumMismatch,
  kMismatch,  // checkpoint/corpus vocabulary or shape disagreement
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace sit

#endif  // SIT_ERROR_HPP_
