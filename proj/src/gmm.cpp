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

#include "crowdforge/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "crowdforge/errors.hpp"

namespace crowdforge::gan {
namespace {

Eigen::Matrix2d floor_covariance(const Eigen::Matrix2d& c, double floor) {
  const Eigen::Matrix2d sym = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sym);
  const Eigen::Vector2d vals = eig.eigenvalues().cwiseMax(floor);
  if (vals == eig.eigenvalues()) return sym;
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

double log_gaussian(const Eigen::Vector2d& x, const GmmComponent& c) {
  const Eigen::LLT<Eigen::Matrix2d> llt(c.covariance);
  const Eigen::Vector2d y = llt.matrixL().solve(x - c.mean);
  const double log_det = 2.0 * std::log(llt.matrixL()(0, 0) * llt.matrixL()(1, 1));
  return -0.5 * y.squaredNorm() - 0.5 * log_det - std::log(2.0 * std::numbers::pi);
}

// Per-point log responsibilities (unnormalized) and the log-sum.
double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::Vector2d vec(const Point2& p) { return {p.x, p.y}; }

}  // namespace

double GmmModel::mean_log_likelihood(std::span<const Point2> points) const {
  double total = 0.0;
  Eigen::VectorXd terms(static_cast<Eigen::Index>(components.size()));
  for (const auto& p : points) {
    for (std::size_t j = 0; j < components.size(); ++j) {
      terms(static_cast<Eigen::Index>(j)) =
          std::log(components[j].weight) + log_gaussian(vec(p), components[j]);
    }
    total += log_sum_exp(terms);
  }
  return total / static_cast<double>(points.size());
}

GmmModel fit_gmm_entries(std::span<const Point2> points, std::size_t k, const GmmConfig& cfg) {
  if (k == 0) throw ContractError("fit_gmm: need at least one component");
  if (k > points.size()) throw ContractError("fit_gmm: more components than points");
  const std::size_t n = points.size();
  std::mt19937_64 rng(cfg.seed);

  // k-means++ seeding.
  std::vector<Eigen::Vector2d> centers;
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centers.push_back(vec(points[first(rng)]));
  std::vector<double> d2(n);
  while (centers.size() < k) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, (vec(points[i]) - c).squaredNorm());
      d2[i] = best;
    }
    double total = 0.0;
    for (double v : d2) total += v;
    if (total == 0.0) {
      centers.push_back(vec(points[first(rng)]));
      continue;
    }
    std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
    centers.push_back(vec(points[pick(rng)]));
  }

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : points) mean += vec(p);
  mean /= static_cast<double>(n);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) cov += (vec(p) - mean) * (vec(p) - mean).transpose();
  cov /= static_cast<double>(n);

  GmmModel model;
  for (const auto& c : centers) {
    model.components.push_back({1.0 / static_cast<double>(k), c, floor_covariance(cov, cfg.covariance_floor)});
  }

  Eigen::MatrixXd resp(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  double previous = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd terms(static_cast<Eigen::Index>(k));
  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    // E step.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        terms(static_cast<Eigen::Index>(j)) =
            std::log(model.components[j].weight) + log_gaussian(vec(points[i]), model.components[j]);
      }
      const double lse = log_sum_exp(terms);
      ll += lse;
      resp.row(static_cast<Eigen::Index>(i)) = (terms.array() - lse).exp().transpose();
    }
    ll /= static_cast<double>(n);
    model.log_likelihood_trace.push_back(ll);
    if (ll - previous < cfg.tolerance) break;
    previous = ll;

    // M step.
    for (std::size_t j = 0; j < k; ++j) {
      const auto r = resp.col(static_cast<Eigen::Index>(j));
      const double nk = r.sum();
      auto& c = model.components[j];
      if (nk <= 0.0) continue;
      Eigen::Vector2d m = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < n; ++i) m += r(static_cast<Eigen::Index>(i)) * vec(points[i]);
      m /= nk;
      Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
      for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d d = vec(points[i]) - m;
        s += r(static_cast<Eigen::Index>(i)) * d * d.transpose();
      }
      c.weight = nk / static_cast<double>(n);
      c.mean = m;
      c.covariance = floor_covariance(s / nk, cfg.covariance_floor);
    }
  }
  return model;
}

std::vector<Point2> sample_gmm_entries(const GmmModel& model, std::size_t n, std::mt19937_64& rng) {
  std::vector<Point2> out;
  if (n == 0) return out;
  std::vector<double> w;
  for (const auto& c : model.components) w.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::Matrix2d> chol;
  for (const auto& c : model.components) chol.push_back(Eigen::LLT<Eigen::Matrix2d>(c.covariance).matrixL());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = pick(rng);
    const double a = gauss(rng);
    const double b = gauss(rng);
    const Eigen::Vector2d x = model.components[j].mean + chol[j] * Eigen::Vector2d(a, b);
    out.push_back({x(0), x(1)});
  }
  return out;
}

}  // namespace crowdforge::gan
