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

#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include "run_config.hpp"

namespace crowdforge::app {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kModelError = 4 };

// Each command logs plain lines to `log` and throws crowdforge errors, which
// run() maps onto exit codes.
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_generate(const RunConfig& cfg, std::size_t count, const std::filesystem::path& out,
                  std::ostream& log);
void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& trajs,
                  const std::filesystem::path& out, std::ostream& log);
void cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& a,
                  const std::filesystem::path& b, const std::filesystem::path& out_dir,
                  std::ostream& log);

// Full command line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& log);

const char* tool_version();

}  // namespace crowdforge::app
