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

// Crowd descriptors and similarity measures.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "crowdforge/core.hpp"

namespace crowdforge::metrics {

struct MetricConfig {
  double kde_bandwidth = 0.5;        // heatmap sigma, meters
  double boundary_bandwidth = 0.25;  // entry-point KDE along the boundary, meters
  double dtw_length_weight = 1.0;    // m/s, multiplies |T_a - T_b|
  double ipd_bin_width = 0.25;       // meters
  int grid_nx = 100;
  int grid_ny = 50;
};

// Density per square meter at cell centers; row 0 is the y_min edge.
struct DensityGrid {
  RegionOfInterest region;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;  // ny rows of nx values

  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  double cell_area() const { return region.width() / nx * (region.height() / ny); }
  // Sum of density times cell area.
  double mass() const;
};

// Parzen-window heatmap: isotropic Gaussian of bandwidth sigma on every
// sample of every trajectory, averaged over all samples.
DensityGrid heatmap(const Dataset& data, int nx, int ny, double sigma);
DensityGrid heatmap(std::span<const Point2> points, const RegionOfInterest& region, int nx, int ny,
                    double sigma);

// CSV: 'nx,ny,x_min,y_min,x_max,y_max' header line, its values, then ny rows.
void write_density_csv(std::ostream& out, const DensityGrid& grid);

inline constexpr int kBoundarySamples = 1000;

struct BoundaryDensity {
  double perimeter = 0.0;
  std::vector<double> positions;  // arc-length bin centers
  std::vector<double> density;    // bin-averaged density, per meter
};

// Wrapped Gaussian KDE of entry arc-lengths on [0, perimeter). Each value is
// the kernel mass of its bin divided by the bin width, so the values
// integrate to 1 for any bandwidth. Throws ContractError on empty input.
BoundaryDensity entry_boundary_density(std::span<const Point2> entries,
                                       const RegionOfInterest& region, double bandwidth);

// Classical DTW with Euclidean point cost plus length_weight * |T_a - T_b|.
double dtw_distance(const Trajectory& a, const Trajectory& b, double length_weight);

// Uniform-weight transport plan between two equally sized sets.
struct TransportPlan {
  Eigen::MatrixXd weights;
};

struct EmdResult {
  double value = 0.0;
  TransportPlan plan;
  std::vector<std::size_t> assignment;  // row i is matched to column assignment[i]
};

// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
// O(n^3)). Returns the column assigned to each row.
std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost);

// Earth Mover's Distance between two sets of n items with uniform weights
// 1/n, given the n x n ground-distance matrix. Throws ContractError when the
// matrix is not square (subsample the larger set first) or is empty.
EmdResult emd(const Eigen::MatrixXd& ground);

template <typename T, typename Distance>
Eigen::MatrixXd ground_matrix(std::span<const T> xs, std::span<const T> ys, Distance&& d) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d(xs[i], ys[j]);
    }
  }
  return m;
}

// Seeded uniform subsample of n indices from [0, total), returned sorted.
std::vector<std::size_t> subsample_indices(std::size_t total, std::size_t n, std::uint64_t seed);

struct Histogram {
  double bin_width = 0.0;
  std::vector<double> mass;  // bin k covers [k*w, (k+1)*w)
  std::size_t pair_count = 0;
};

// Inter-pedestrian distances: every unordered pair in every frame, binned
// and normalized to unit mass. Throws ContractError when no frame holds two
// agents.
Histogram ipd_histogram(std::span<const std::vector<Point2>> frames, double bin_width);

}  // namespace crowdforge::metrics
