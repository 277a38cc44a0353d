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

// Text checkpoint format:
//
//   # crowdforge-model v1
//   # key=value                      (manifest, optional, any number)
//   <name> shape <d1>,<d2> values <v1> <v2> ...
//
// Values are row-major with 17 significant digits, so reading a file back
// reproduces every double bit-exactly.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "crowdforge/nn/tape.hpp"

namespace crowdforge::nn {

inline constexpr const char* kCheckpointHeader = "# crowdforge-model v1";

struct Checkpoint {
  std::vector<std::pair<std::string, std::string>> manifest;
  std::vector<Parameter> tensors;

  // Manifest lookup; empty string when absent.
  std::string manifest_value(const std::string& key) const;
  // Tensor lookup; nullptr when absent.
  const Parameter* find(const std::string& name) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
// Throws FormatError for a wrong header, ParseError for malformed lines.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace crowdforge::nn
