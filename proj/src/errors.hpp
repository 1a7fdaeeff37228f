// Copyright 2026 The sadp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SADP_ERRORS_HPP
#define SADP_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace sadp {

// Error categories. They map one-to-one onto the C API status codes and,
// through those, onto CLI exit codes.
enum class ErrorCode {
  io,              // unreadable/unwritable path
  parse,           // malformed file content or wire payload
  config,          // invalid configuration (weights, policy, flags)
  domain,          // argument outside its mathematical domain
  contract,        // caller violated a precondition (length/id mismatch)
  empty_corpus,    // scoring requested with zero PII occurrences
  agent_network,   // agent endpoint unreachable (retryable)
  agent_protocol,  // agent answered with an unparseable payload
  diverged,        // training loss became non-finite
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sadp

#endif  // SADP_ERRORS_HPP
