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

#include "crowdforge/nn/tape.hpp"

#include <cmath>

#include "crowdforge/errors.hpp"

namespace crowdforge::nn {
namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

}  // namespace

Var Tape::push(Tensor value, bool requires_grad,
               std::function<void(Tape&, const Tensor&)> backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

void Tape::accumulate(Var v, const Tensor& g) { accumulate_expr(v, g); }

template <typename Expr>
void Tape::accumulate_expr(Var v, const Expr& g) {
  Node& n = nodes_[idx(v)];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Var Tape::constant(Tensor value) { return push(std::move(value), false); }

Var Tape::parameter(const Parameter& p) {
  if (auto it = bound_.find(&p.value); it != bound_.end()) return it->second;
  Var v = push(p.value, true, [](Tape&, const Tensor&) {});
  bound_.emplace(&p.value, v);
  return v;
}

double Tape::scalar(Var v) const {
  const Tensor& t = value(v);
  if (t.rows() != 1 || t.cols() != 1) throw ContractError("scalar: node is not 1x1");
  return t(0, 0);
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions " + std::to_string(av.cols()) + " vs " +
                     std::to_string(bv.rows()));
  }
  Tensor out = av * bv;
  return push(std::move(out), requires_grad(a) || requires_grad(b),
              [a, b](Tape& t, const Tensor& g) {
                if (t.requires_grad(a)) t.accumulate_expr(a, g * t.value(b).transpose());
                if (t.requires_grad(b)) t.accumulate_expr(b, t.value(a).transpose() * g);
              });
}

Var Tape::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Tensor out = value(a) + value(b);
  return push(std::move(out), requires_grad(a) || requires_grad(b),
              [a, b](Tape& t, const Tensor& g) {
                t.accumulate(a, g);
                t.accumulate(b, g);
              });
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  Tensor out = value(a) - value(b);
  return push(std::move(out), requires_grad(a) || requires_grad(b),
              [a, b](Tape& t, const Tensor& g) {
                t.accumulate(a, g);
                t.accumulate_expr(b, -g);
              });
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  Tensor out = value(a).cwiseProduct(value(b));
  return push(std::move(out), requires_grad(a) || requires_grad(b),
              [a, b](Tape& t, const Tensor& g) {
                if (t.requires_grad(a)) t.accumulate_expr(a, g.cwiseProduct(t.value(b)));
                if (t.requires_grad(b)) t.accumulate_expr(b, g.cwiseProduct(t.value(a)));
              });
}

Var Tape::add_bias(Var x, Var bias) {
  const Tensor& xv = value(x);
  const Tensor& bv = value(bias);
  if (bv.cols() != 1 || bv.rows() != xv.rows()) {
    throw ShapeError("add_bias: bias " + std::to_string(bv.rows()) + "x" +
                     std::to_string(bv.cols()) + " for input with " + std::to_string(xv.rows()) +
                     " rows");
  }
  Tensor out = xv.colwise() + bv.col(0);
  return push(std::move(out), requires_grad(x) || requires_grad(bias),
              [x, bias](Tape& t, const Tensor& g) {
                t.accumulate(x, g);
                if (t.requires_grad(bias)) t.accumulate_expr(bias, g.rowwise().sum());
              });
}

Var Tape::scale(Var a, double s) { return affine(a, s, 0.0); }

Var Tape::affine(Var a, double s, double c) {
  Tensor out = (value(a) * s).array() + c;
  return push(std::move(out), requires_grad(a),
              [a, s](Tape& t, const Tensor& g) { t.accumulate_expr(a, g * s); });
}

Var Tape::scale_rows(Var a, const Eigen::VectorXd& factors) {
  if (factors.size() != value(a).rows()) throw ShapeError("scale_rows: factor count mismatch");
  Tensor out = factors.asDiagonal() * value(a);
  return push(std::move(out), requires_grad(a), [a, factors](Tape& t, const Tensor& g) {
    t.accumulate_expr(a, factors.asDiagonal() * g);
  });
}

Var Tape::leaky_relu(Var a, double slope) {
  Tensor out = value(a).unaryExpr([slope](double x) { return x >= 0.0 ? x : slope * x; });
  return push(std::move(out), requires_grad(a), [a, slope](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    t.accumulate_expr(a, g.binaryExpr(x, [slope](double gi, double xi) {
      return xi >= 0.0 ? gi : slope * gi;
    }));
  });
}

Var Tape::tanh(Var a) {
  Tensor out = value(a).array().tanh();
  Var self = push(std::move(out), requires_grad(a));
  if (requires_grad(a)) {
    nodes_[idx(self)].backward = [a, self](Tape& t, const Tensor& g) {
      const Tensor& y = t.value(self);
      t.accumulate_expr(a, (g.array() * (1.0 - y.array().square())).matrix());
    };
  }
  return self;
}

Var Tape::sigmoid(Var a) {
  Tensor out = value(a).unaryExpr([](double x) { return stable_sigmoid(x); });
  Var self = push(std::move(out), requires_grad(a));
  if (requires_grad(a)) {
    nodes_[idx(self)].backward = [a, self](Tape& t, const Tensor& g) {
      const Tensor& y = t.value(self);
      t.accumulate_expr(a, (g.array() * y.array() * (1.0 - y.array())).matrix());
    };
  }
  return self;
}

Var Tape::log(Var a, double floor) {
  Tensor out = value(a).unaryExpr([floor](double x) { return std::log(std::max(x, floor)); });
  return push(std::move(out), requires_grad(a), [a, floor](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    t.accumulate_expr(a, g.binaryExpr(x, [floor](double gi, double xi) {
      return xi > floor ? gi / xi : 0.0;
    }));
  });
}

Var Tape::clamp(Var a, double lo, double hi) {
  Tensor out = value(a).cwiseMax(lo).cwiseMin(hi);
  return push(std::move(out), requires_grad(a), [a, lo, hi](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    t.accumulate_expr(a, g.binaryExpr(x, [lo, hi](double gi, double xi) {
      return (xi >= lo && xi <= hi) ? gi : 0.0;
    }));
  });
}

Var Tape::clamp_rows(Var a, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const Tensor& x = value(a);
  if (lo.size() != x.rows() || hi.size() != x.rows()) throw ShapeError("clamp_rows: bound size");
  Tensor out = x;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out.row(r) = out.row(r).cwiseMax(lo(r)).cwiseMin(hi(r));
  }
  return push(std::move(out), requires_grad(a), [a, lo, hi](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(a);
    Tensor masked = g;
    for (Eigen::Index c = 0; c < xv.cols(); ++c) {
      for (Eigen::Index r = 0; r < xv.rows(); ++r) {
        if (xv(r, c) < lo(r) || xv(r, c) > hi(r)) masked(r, c) = 0.0;
      }
    }
    t.accumulate(a, masked);
  });
}

Var Tape::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  const Eigen::Index cols = value(parts[0]).cols();
  Eigen::Index rows = 0;
  bool rg = false;
  for (Var p : parts) {
    if (value(p).cols() != cols) throw ShapeError("concat_rows: column count mismatch");
    rows += value(p).rows();
    rg = rg || requires_grad(p);
  }
  Tensor out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, value(p).rows()) = value(p);
    r += value(p).rows();
  }
  std::vector<Var> copy(parts.begin(), parts.end());
  return push(std::move(out), rg, [copy](Tape& t, const Tensor& g) {
    Eigen::Index row = 0;
    for (Var p : copy) {
      const Eigen::Index n = t.value(p).rows();
      if (t.requires_grad(p)) t.accumulate_expr(p, g.middleRows(row, n));
      row += n;
    }
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no parts");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool rg = false;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw ShapeError("concat_cols: row count mismatch");
    cols += value(p).cols();
    rg = rg || requires_grad(p);
  }
  Tensor out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, value(p).cols()) = value(p);
    c += value(p).cols();
  }
  std::vector<Var> copy(parts.begin(), parts.end());
  return push(std::move(out), rg, [copy](Tape& t, const Tensor& g) {
    Eigen::Index col = 0;
    for (Var p : copy) {
      const Eigen::Index n = t.value(p).cols();
      if (t.requires_grad(p)) t.accumulate_expr(p, g.middleCols(col, n));
      col += n;
    }
  });
}

Var Tape::slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  const Tensor& x = value(a);
  if (start < 0 || count < 0 || start + count > x.rows()) throw ShapeError("slice_rows: out of range");
  Tensor out = x.middleRows(start, count);
  return push(std::move(out), requires_grad(a), [a, start, count](Tape& t, const Tensor& g) {
    Node& n = t.nodes_[idx(a)];
    if (n.grad.size() == 0) n.grad = Tensor::Zero(n.value.rows(), n.value.cols());
    n.grad.middleRows(start, count) += g;
  });
}

Var Tape::gather_cols(Var a, std::span<const Eigen::Index> cols) {
  const Tensor& x = value(a);
  Tensor out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= x.cols()) throw ShapeError("gather_cols: index out of range");
    out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  }
  std::vector<Eigen::Index> copy(cols.begin(), cols.end());
  return push(std::move(out), requires_grad(a), [a, copy](Tape& t, const Tensor& g) {
    Node& n = t.nodes_[idx(a)];
    if (n.grad.size() == 0) n.grad = Tensor::Zero(n.value.rows(), n.value.cols());
    for (std::size_t j = 0; j < copy.size(); ++j) {
      n.grad.col(copy[j]) += g.col(static_cast<Eigen::Index>(j));
    }
  });
}

Var Tape::sum(Var a) {
  Tensor out(1, 1);
  out(0, 0) = value(a).sum();
  return push(std::move(out), requires_grad(a), [a](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    t.accumulate_expr(a, Tensor::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var Tape::col_norm(Var a) {
  Tensor out = value(a).colwise().norm();
  Var self = push(std::move(out), requires_grad(a));
  if (requires_grad(a)) {
    nodes_[idx(self)].backward = [a, self](Tape& t, const Tensor& g) {
      const Tensor& x = t.value(a);
      const Tensor& n = t.value(self);
      Tensor dx(x.rows(), x.cols());
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        // Subgradient 0 at the origin.
        dx.col(c) = n(0, c) > 0.0 ? Eigen::VectorXd(x.col(c) * (g(0, c) / n(0, c)))
                                  : Eigen::VectorXd::Zero(x.rows());
      }
      t.accumulate(a, dx);
    };
  }
  return self;
}

void Tape::backward(Var loss) {
  const Tensor& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be a scalar, got " + std::to_string(lv.rows()) + "x" +
                        std::to_string(lv.cols()));
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!requires_grad(loss)) return;
  nodes_[idx(loss)].grad = Tensor::Ones(1, 1);
  for (std::size_t i = idx(loss) + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

Tensor Tape::gradient(Var v) const {
  const Node& n = nodes_[idx(v)];
  if (n.grad.size() == 0) return Tensor::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor Tape::gradient(const Parameter& p) const {
  if (auto it = bound_.find(&p.value); it != bound_.end()) return gradient(it->second);
  return Tensor::Zero(p.value.rows(), p.value.cols());
}

std::vector<Tensor> gradients(const Tape& tape, std::span<Parameter* const> params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back(tape.gradient(*p));
  return out;
}

}  // namespace crowdforge::nn
