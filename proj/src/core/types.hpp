// Copyright 2026 The SPINE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPINE_CORE_TYPES_HPP
#define SPINE_CORE_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace spine {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Error categories. The numeric values double as process exit codes and
/// as the status codes of the shared-library C API.
enum class ErrorCode : int {
  generic = 1,   // unclassified failure
  io = 2,        // missing/unreadable/unwritable file
  shape = 3,     // dimension or format mismatch
  numeric = 4,   // non-finite value where a finite one is required
  config = 5,    // invalid configuration or argument
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace spine

#endif  // SPINE_CORE_TYPES_HPP
