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

#include <span>
#include <vector>

#include "crowdforge/nn/tape.hpp"

namespace crowdforge::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  long step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

// Zero moments shaped like params.
AdamState make_adam_state(std::span<Parameter* const> params, AdamConfig config = {});

// One bias-corrected Adam update; throws ShapeError when grads or moments do
// not match the parameters.
void adam_step(std::span<Parameter* const> params, std::span<const Tensor> grads, AdamState& state);

}  // namespace crowdforge::nn
