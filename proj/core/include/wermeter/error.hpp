// Copyright 2026 The wermeter authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WERMETER_ERROR_HPP
#define WERMETER_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wermeter {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (bad JSON line, bad binary record).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a contract (duplicate id,
// missing hypothesis, dimension mismatch).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Binary container problems: bad magic, truncation, dim disagreement.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Remote encoder failures after retries are exhausted.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace wermeter

#endif  // WERMETER_ERROR_HPP
