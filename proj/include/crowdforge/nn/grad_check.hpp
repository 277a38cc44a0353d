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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crowdforge/nn/tape.hpp"

namespace crowdforge::nn {

// Builds a scalar loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckOptions {
  double step = 1e-5;       // central-difference step h
  double tolerance = 1e-4;  // pass threshold on the max relative error
  // Relative error is |a - n| / max(|a|, |n|, denominator_floor).
  double denominator_floor = 1e-8;
  // 0 checks every entry; otherwise a seeded random subset per parameter.
  std::size_t max_entries_per_param = 0;
  std::uint64_t seed = 0;
  // An entry that fails at `step` is re-differenced at step/10, step/100, ...
  // this many times and keeps the best agreement. A piecewise-linear kink
  // within `step` of the base point spoils the central difference at that step.
  int refinements = 0;
};

struct GradCheckEntry {
  std::string parameter;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  bool passed = true;
  double max_relative_error = 0.0;
  GradCheckEntry worst;
  std::vector<double> per_parameter_max;  // aligned with the params list
  std::size_t entries_checked = 0;
  std::size_t entries_refined = 0;  // entries that only passed at a smaller step
};

// Analytic gradients from one backward pass.
std::vector<Tensor> analytic_gradients(const LossBuilder& loss, std::span<Parameter* const> params);

// Compares the analytic gradients with central differences of the loss.
GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& options = {});

// Same comparison against caller-supplied gradients.
GradCheckReport compare_gradients(const LossBuilder& loss, std::span<Parameter* const> params,
                                  std::span<const Tensor> analytic,
                                  const GradCheckOptions& options = {});

}  // namespace crowdforge::nn
