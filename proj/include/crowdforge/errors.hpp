// Copyright 2026 The CrowdForge Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace crowdforge {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller violated a precondition (sizes, counts, empty inputs).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Tensor shapes do not chain.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structurally valid input that is missing required pieces.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Input parsed fine but its content is inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

// Checkpoint does not match the expected architecture.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Missing, unknown or malformed configuration entry.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace crowdforge
