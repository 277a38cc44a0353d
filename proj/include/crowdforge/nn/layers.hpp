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

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "crowdforge/nn/tape.hpp"

namespace crowdforge::nn {

enum class ActivationKind { kLeakyRelu, kTanh, kSigmoid, kLinear };

struct Activation {
  ActivationKind kind = ActivationKind::kLinear;
  double slope = 0.0;  // leaky-relu negative slope

  static Activation leaky_relu(double slope) { return {ActivationKind::kLeakyRelu, slope}; }
  static Activation tanh() { return {ActivationKind::kTanh, 0.0}; }
  static Activation sigmoid() { return {ActivationKind::kSigmoid, 0.0}; }
  static Activation linear() { return {ActivationKind::kLinear, 0.0}; }
};

// x if x >= 0 else slope * x, elementwise.
Tensor leaky_relu(const Tensor& x, double slope);

struct DenseLayer {
  Parameter weight;  // [out x in]
  Parameter bias;    // [out x 1]
  Activation activation;

  Eigen::Index in_size() const { return weight.value.cols(); }
  Eigen::Index out_size() const { return weight.value.rows(); }
};

// Stack of fully connected layers applied in sequence.
struct FCBlock {
  std::vector<DenseLayer> layers;

  // sizes = {in, h1, ..., out}; hidden layers use `hidden`, the last layer
  // uses `output`. Weights start at zero; see init_uniform.
  static FCBlock make(const std::string& name, const std::vector<Eigen::Index>& sizes,
                      Activation hidden, Activation output);

  Eigen::Index in_size() const { return layers.front().in_size(); }
  Eigen::Index out_size() const { return layers.back().out_size(); }
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
};

// LSTM with separate input/forget/output/candidate gates acting on [x; h].
struct LSTMCell {
  Eigen::Index input_size = 0;
  Eigen::Index hidden_size = 0;
  Parameter w_i, w_f, w_o, w_g;  // [hidden x (input + hidden)]
  Parameter b_i, b_f, b_o, b_g;  // [hidden x 1]

  static LSTMCell make(const std::string& name, Eigen::Index input_size, Eigen::Index hidden_size);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights, zero biases.
void init_uniform(FCBlock& block, std::mt19937_64& rng);
void init_uniform(LSTMCell& cell, std::mt19937_64& rng);

// Sets every weight and bias to zero.
void zero_parameters(std::span<Parameter* const> params);

// Binding of a block's parameters to a tape, either as trainable leaves or
// as constants (frozen network).
class BoundFC {
 public:
  BoundFC(Tape& tape, const FCBlock& block, bool trainable);
  // Throws ShapeError naming the layer index when the input rows mismatch.
  Var forward(Var input) const;

 private:
  struct Layer {
    Var weight;
    Var bias;
    Activation activation;
  };
  Tape* tape_;
  std::vector<Layer> layers_;
};

struct LSTMState {
  Var h;
  Var c;
};

class BoundLSTM {
 public:
  BoundLSTM(Tape& tape, const LSTMCell& cell, bool trainable);

  // Zero state for a batch of `cols` sequences.
  LSTMState zero_state(Eigen::Index cols) const;
  LSTMState step(Var input, const LSTMState& state) const;
  Eigen::Index hidden_size() const { return hidden_; }

 private:
  Tape* tape_;
  Eigen::Index input_size_;
  Eigen::Index hidden_;
  Var w_all_;  // gates stacked [i; f; o; g]
  Var b_all_;
};

// Applies an activation on the tape.
Var activate(Tape& tape, Var x, const Activation& act);

// Forward-only conveniences (no gradient recorded for parameters).
Tensor fc_forward(const FCBlock& block, const Tensor& input);
// Returns (h', c').
std::pair<Tensor, Tensor> lstm_step(const LSTMCell& cell, const Tensor& input, const Tensor& h,
                                    const Tensor& c);

}  // namespace crowdforge::nn
