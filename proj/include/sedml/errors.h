// Copyright 2026 The SEDML Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEDML_ERRORS_H_
#define SEDML_ERRORS_H_

#include <stdexcept>
#include <string>

namespace sedml {

// Caller violated a precondition (bad width, wrong party, malformed input).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// The two-party protocol cannot proceed (exhausted or reused triples).
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what)
      : std::runtime_error(what) {}
};

// A real value does not fit the signed range of the ring.
class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

// A party waited on a round its peer never submitted.
class DeadlockError : public ProtocolError {
 public:
  explicit DeadlockError(const std::string& what) : ProtocolError(what) {}
};

// The accountant cannot reach the requested privacy target.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace sedml

#endif  // SEDML_ERRORS_H_
