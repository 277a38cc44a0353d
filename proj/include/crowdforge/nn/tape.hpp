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

// Reverse-mode automatic differentiation over dense matrices.
//
// Values are Eigen matrices; by convention a batch is laid out one sample
// per column. A Tape records every operation as a node; backward() replays
// the nodes in reverse creation order, which is a valid topological order.
// Nodes that do not depend on any trainable leaf carry no gradient and are
// skipped during the backward sweep.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace crowdforge::nn {

using Tensor = Eigen::MatrixXd;

// A named trainable tensor.
struct Parameter {
  std::string name;
  Tensor value;
};

class Tape;

// Handle to a node on a Tape.
struct Var {
  std::int32_t index = -1;
  bool valid() const { return index >= 0; }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  Var constant(Tensor value);
  // Trainable leaf bound to p; repeated calls with the same parameter return
  // the same node so gradients accumulate across uses.
  Var parameter(const Parameter& p);

  // Linear algebra.
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var add_bias(Var x, Var bias);  // bias is [rows x 1], broadcast over columns
  Var scale(Var a, double s);
  Var affine(Var a, double s, double c);  // s * a + c elementwise
  // Multiplies row r by factors[r].
  Var scale_rows(Var a, const Eigen::VectorXd& factors);

  // Activations.
  Var leaky_relu(Var a, double slope);
  Var tanh(Var a);
  Var sigmoid(Var a);
  // log(clamp(a, floor, +inf)); zero gradient where clamped.
  Var log(Var a, double floor);
  // Elementwise clamp; zero gradient where clamped.
  Var clamp(Var a, double lo, double hi);
  // Per-row clamp, bounds given as column vectors.
  Var clamp_rows(Var a, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

  // Structure.
  Var concat_rows(std::span<const Var> parts);
  Var concat_cols(std::span<const Var> parts);
  Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
  Var gather_cols(Var a, std::span<const Eigen::Index> cols);

  // Reductions.
  Var sum(Var a);  // -> 1x1
  Var col_norm(Var a);  // Euclidean norm of each column -> 1 x cols

  const Tensor& value(Var v) const { return nodes_[idx(v)].value; }
  double scalar(Var v) const;
  bool requires_grad(Var v) const { return nodes_[idx(v)].requires_grad; }

  // Accumulates d(loss)/d(node) for every node. Throws ContractError for a
  // loss that is not 1x1.
  void backward(Var loss);

  // Gradient of a node after backward(); zero tensor if the node was not
  // reached.
  Tensor gradient(Var v) const;
  // Gradient with respect to a parameter; zero if it was never bound.
  Tensor gradient(const Parameter& p) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::function<void(Tape&, const Tensor& out_grad)> backward;
  };

  static std::size_t idx(Var v) { return static_cast<std::size_t>(v.index); }
  Var push(Tensor value, bool requires_grad,
           std::function<void(Tape&, const Tensor&)> backward = {});
  void accumulate(Var v, const Tensor& g);
  template <typename Expr>
  void accumulate_expr(Var v, const Expr& g);

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, Var> bound_;
};

// Gradients for a list of parameters, in order.
std::vector<Tensor> gradients(const Tape& tape, std::span<Parameter* const> params);

}  // namespace crowdforge::nn
