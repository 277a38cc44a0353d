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

// Gaussian mixture baseline for entry points, fitted with EM.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "crowdforge/core.hpp"

namespace crowdforge::gan {

struct GmmComponent {
  double weight = 0.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();
};

struct GmmModel {
  std::vector<GmmComponent> components;
  // Mean log-likelihood per point at every E step.
  std::vector<double> log_likelihood_trace;

  double mean_log_likelihood(std::span<const Point2> points) const;
};

struct GmmConfig {
  std::size_t max_iterations = 500;
  double tolerance = 1e-8;         // stop when the mean log-likelihood gains less
  double covariance_floor = 1e-6;  // minimum eigenvalue of every covariance
  std::uint64_t seed = 0;          // k-means++ initialization
};

// Throws ContractError when k is 0 or exceeds the number of points.
GmmModel fit_gmm_entries(std::span<const Point2> points, std::size_t k, const GmmConfig& cfg = {});

std::vector<Point2> sample_gmm_entries(const GmmModel& model, std::size_t n, std::mt19937_64& rng);

}  // namespace crowdforge::gan
