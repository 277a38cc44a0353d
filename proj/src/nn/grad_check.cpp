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

#include "crowdforge/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "crowdforge/errors.hpp"

namespace crowdforge::nn {
namespace {

double evaluate(const LossBuilder& loss) {
  Tape tape;
  return tape.scalar(loss(tape));
}

}  // namespace

std::vector<Tensor> analytic_gradients(const LossBuilder& loss, std::span<Parameter* const> params) {
  Tape tape;
  const Var out = loss(tape);
  tape.backward(out);
  return gradients(tape, params);
}

GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& options) {
  const auto analytic = analytic_gradients(loss, params);
  return compare_gradients(loss, params, analytic, options);
}

GradCheckReport compare_gradients(const LossBuilder& loss, std::span<Parameter* const> params,
                                  std::span<const Tensor> analytic,
                                  const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw DomainError("grad_check: step must be positive");
  if (analytic.size() != params.size()) throw ShapeError("grad_check: gradient count mismatch");
  GradCheckReport report;
  report.per_parameter_max.assign(params.size(), 0.0);
  std::mt19937_64 rng(options.seed);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& value = params[k]->value;
    const Eigen::Index total = value.size();
    std::vector<Eigen::Index> entries(static_cast<std::size_t>(total));
    std::iota(entries.begin(), entries.end(), Eigen::Index{0});
    if (options.max_entries_per_param > 0 && entries.size() > options.max_entries_per_param) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(options.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }
    for (Eigen::Index flat : entries) {
      const Eigen::Index r = flat % value.rows();
      const Eigen::Index c = flat / value.rows();
      const double a = analytic[k](r, c);
      const double saved = value(r, c);
      double h = options.step;
      double numeric = 0.0;
      double rel = std::numeric_limits<double>::infinity();
      for (int level = 0; level <= options.refinements; ++level, h /= 10.0) {
        value(r, c) = saved + h;
        const double up = evaluate(loss);
        value(r, c) = saved - h;
        const double down = evaluate(loss);
        value(r, c) = saved;
        const double n = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(a), std::abs(n), options.denominator_floor});
        const double e = std::abs(a - n) / denom;
        if (e < rel) {
          rel = e;
          numeric = n;
        }
        if (rel < options.tolerance) {
          if (level > 0) ++report.entries_refined;
          break;
        }
      }
      ++report.entries_checked;
      report.per_parameter_max[k] = std::max(report.per_parameter_max[k], rel);
      if (rel > report.max_relative_error || report.entries_checked == 1) {
        report.max_relative_error = std::max(report.max_relative_error, rel);
        if (rel >= report.max_relative_error) {
          report.worst = GradCheckEntry{params[k]->name, r, c, a, numeric, rel};
        }
      }
    }
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

}  // namespace crowdforge::nn
