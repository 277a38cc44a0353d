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

#include "crowdforge/nn/adam.hpp"

#include <cmath>

#include "crowdforge/errors.hpp"

namespace crowdforge::nn {

AdamState make_adam_state(std::span<Parameter* const> params, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const Parameter* p : params) {
    state.first_moment.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
    state.second_moment.push_back(Tensor::Zero(p->value.rows(), p->value.cols()));
  }
  return state;
}

void adam_step(std::span<Parameter* const> params, std::span<const Tensor> grads, AdamState& state) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw ShapeError("adam_step: parameter/gradient/moment counts differ");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor& p = params[k]->value;
    if (grads[k].rows() != p.rows() || grads[k].cols() != p.cols() ||
        state.first_moment[k].rows() != p.rows() || state.first_moment[k].cols() != p.cols()) {
      throw ShapeError("adam_step: shape mismatch for '" + params[k]->name + "'");
    }
  }
  const auto& cfg = state.config;
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& m = state.first_moment[k];
    Tensor& v = state.second_moment[k];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grads[k];
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grads[k].cwiseAbs2();
    params[k]->value.array() -=
        cfg.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.epsilon);
  }
}

}  // namespace crowdforge::nn
