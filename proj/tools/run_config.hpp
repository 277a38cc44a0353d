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

// Flat key=value run configuration shared by every command.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "crowdforge/core.hpp"
#include "crowdforge/metrics.hpp"
#include "crowdforge/simulator.hpp"
#include "crowdforge/trajgan.hpp"

namespace crowdforge::app {

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path model;
  std::filesystem::path output_dir;
  std::optional<RegionOfInterest> region;
  std::uint64_t seed = 0;
  std::size_t log_every = 100;
  gan::TrainConfig train;
  std::size_t generate_n_max = 0;  // 0 uses the value stored with the model
  sim::SimConfig sim;
  metrics::MetricConfig metrics;

  std::map<std::string, std::string> entries;  // as written, for the manifest
  std::string hash;  // FNV-1a over the sorted entries

  const RegionOfInterest& require_region() const;
  std::filesystem::path model_path() const;
};

// Throws ConfigError for syntax errors, unknown keys and bad values. Relative
// paths are resolved against base_dir.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& text);

}  // namespace crowdforge::app
