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

#include "crowdforge/nn/layers.hpp"

#include <array>
#include <cmath>

#include "crowdforge/errors.hpp"

namespace crowdforge::nn {
namespace {

Parameter make_param(std::string name, Eigen::Index rows, Eigen::Index cols) {
  return Parameter{std::move(name), Tensor::Zero(rows, cols)};
}

void fill_uniform(Tensor& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index c = 0; c < t.cols(); ++c) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) t(r, c) = dist(rng);
  }
}

}  // namespace

Tensor leaky_relu(const Tensor& x, double slope) {
  return x.unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
}

FCBlock FCBlock::make(const std::string& name, const std::vector<Eigen::Index>& sizes,
                      Activation hidden, Activation output) {
  if (sizes.size() < 2) throw ContractError("FCBlock::make: need at least input and output size");
  FCBlock block;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::string prefix = name + ".fc" + std::to_string(l);
    block.layers.push_back(DenseLayer{make_param(prefix + ".weight", sizes[l + 1], sizes[l]),
                                      make_param(prefix + ".bias", sizes[l + 1], 1),
                                      l + 2 == sizes.size() ? output : hidden});
  }
  return block;
}

std::vector<Parameter*> FCBlock::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Parameter*> FCBlock::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

LSTMCell LSTMCell::make(const std::string& name, Eigen::Index input_size,
                        Eigen::Index hidden_size) {
  if (input_size < 1 || hidden_size < 1) throw ContractError("LSTMCell::make: sizes must be >= 1");
  const Eigen::Index cols = input_size + hidden_size;
  LSTMCell cell;
  cell.input_size = input_size;
  cell.hidden_size = hidden_size;
  cell.w_i = make_param(name + ".w_i", hidden_size, cols);
  cell.w_f = make_param(name + ".w_f", hidden_size, cols);
  cell.w_o = make_param(name + ".w_o", hidden_size, cols);
  cell.w_g = make_param(name + ".w_g", hidden_size, cols);
  cell.b_i = make_param(name + ".b_i", hidden_size, 1);
  cell.b_f = make_param(name + ".b_f", hidden_size, 1);
  cell.b_o = make_param(name + ".b_o", hidden_size, 1);
  cell.b_g = make_param(name + ".b_g", hidden_size, 1);
  return cell;
}

std::vector<Parameter*> LSTMCell::parameters() {
  return {&w_i, &w_f, &w_o, &w_g, &b_i, &b_f, &b_o, &b_g};
}

std::vector<const Parameter*> LSTMCell::parameters() const {
  return {&w_i, &w_f, &w_o, &w_g, &b_i, &b_f, &b_o, &b_g};
}

void init_uniform(FCBlock& block, std::mt19937_64& rng) {
  for (auto& layer : block.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_size()));
    fill_uniform(layer.weight.value, bound, rng);
    layer.bias.value.setZero();
  }
}

void init_uniform(LSTMCell& cell, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cell.input_size + cell.hidden_size));
  for (Parameter* w : {&cell.w_i, &cell.w_f, &cell.w_o, &cell.w_g}) fill_uniform(w->value, bound, rng);
  for (Parameter* b : {&cell.b_i, &cell.b_f, &cell.b_o, &cell.b_g}) b->value.setZero();
}

void zero_parameters(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->value.setZero();
}

Var activate(Tape& tape, Var x, const Activation& act) {
  switch (act.kind) {
    case ActivationKind::kLeakyRelu: return tape.leaky_relu(x, act.slope);
    case ActivationKind::kTanh: return tape.tanh(x);
    case ActivationKind::kSigmoid: return tape.sigmoid(x);
    case ActivationKind::kLinear: return x;
  }
  return x;
}

BoundFC::BoundFC(Tape& tape, const FCBlock& block, bool trainable) : tape_(&tape) {
  for (std::size_t l = 0; l < block.layers.size(); ++l) {
    const auto& layer = block.layers[l];
    if (l > 0 && layer.in_size() != block.layers[l - 1].out_size()) {
      throw ShapeError("FCBlock layer " + std::to_string(l) + " does not chain with layer " +
                       std::to_string(l - 1));
    }
    Layer bound;
    bound.weight = trainable ? tape.parameter(layer.weight) : tape.constant(layer.weight.value);
    bound.bias = trainable ? tape.parameter(layer.bias) : tape.constant(layer.bias.value);
    bound.activation = layer.activation;
    layers_.push_back(bound);
  }
}

Var BoundFC::forward(Var input) const {
  Var x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (tape_->value(x).rows() != tape_->value(layer.weight).cols()) {
      throw ShapeError("fc_forward: layer " + std::to_string(l) + " expects " +
                       std::to_string(tape_->value(layer.weight).cols()) + " inputs, got " +
                       std::to_string(tape_->value(x).rows()));
    }
    x = tape_->add_bias(tape_->matmul(layer.weight, x), layer.bias);
    x = activate(*tape_, x, layer.activation);
  }
  return x;
}

BoundLSTM::BoundLSTM(Tape& tape, const LSTMCell& cell, bool trainable)
    : tape_(&tape), input_size_(cell.input_size), hidden_(cell.hidden_size) {
  auto bind = [&](const Parameter& p) {
    return trainable ? tape.parameter(p) : tape.constant(p.value);
  };
  const std::array<Var, 4> ws = {bind(cell.w_i), bind(cell.w_f), bind(cell.w_o), bind(cell.w_g)};
  const std::array<Var, 4> bs = {bind(cell.b_i), bind(cell.b_f), bind(cell.b_o), bind(cell.b_g)};
  for (Var w : ws) {
    if (tape.value(w).rows() != hidden_ || tape.value(w).cols() != input_size_ + hidden_) {
      throw ShapeError("LSTM gate weight has inconsistent shape");
    }
  }
  w_all_ = tape.concat_rows(ws);
  b_all_ = tape.concat_rows(bs);
}

LSTMState BoundLSTM::zero_state(Eigen::Index cols) const {
  return {tape_->constant(Tensor::Zero(hidden_, cols)), tape_->constant(Tensor::Zero(hidden_, cols))};
}

LSTMState BoundLSTM::step(Var input, const LSTMState& state) const {
  Tape& t = *tape_;
  if (t.value(input).rows() != input_size_) {
    throw ShapeError("lstm_step: expected " + std::to_string(input_size_) + " input rows, got " +
                     std::to_string(t.value(input).rows()));
  }
  if (t.value(state.h).rows() != hidden_ || t.value(state.c).rows() != hidden_ ||
      t.value(state.h).cols() != t.value(input).cols()) {
    throw ShapeError("lstm_step: state shape mismatch");
  }
  const std::array<Var, 2> parts = {input, state.h};
  const Var xh = t.concat_rows(parts);
  const Var pre = t.add_bias(t.matmul(w_all_, xh), b_all_);
  const Var i = t.sigmoid(t.slice_rows(pre, 0, hidden_));
  const Var f = t.sigmoid(t.slice_rows(pre, hidden_, hidden_));
  const Var o = t.sigmoid(t.slice_rows(pre, 2 * hidden_, hidden_));
  const Var g = t.tanh(t.slice_rows(pre, 3 * hidden_, hidden_));
  const Var c_next = t.add(t.mul(f, state.c), t.mul(i, g));
  const Var h_next = t.mul(o, t.tanh(c_next));
  return {h_next, c_next};
}

Tensor fc_forward(const FCBlock& block, const Tensor& input) {
  Tape tape;
  BoundFC fc(tape, block, false);
  return tape.value(fc.forward(tape.constant(input)));
}

std::pair<Tensor, Tensor> lstm_step(const LSTMCell& cell, const Tensor& input, const Tensor& h,
                                    const Tensor& c) {
  Tape tape;
  BoundLSTM lstm(tape, cell, false);
  const LSTMState next = lstm.step(tape.constant(input), {tape.constant(h), tape.constant(c)});
  return {tape.value(next.h), tape.value(next.c)};
}

}  // namespace crowdforge::nn
