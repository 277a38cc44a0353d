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

#include "crowdforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include "crowdforge/errors.hpp"

namespace crowdforge::metrics {

double DensityGrid::mass() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * cell_area();
}

DensityGrid heatmap(std::span<const Point2> points, const RegionOfInterest& region, int nx, int ny,
                    double sigma) {
  if (!(sigma > 0.0)) throw DomainError("heatmap: bandwidth must be positive");
  if (nx < 1 || ny < 1) throw DomainError("heatmap: grid must have at least one cell");
  DensityGrid grid{region, nx, ny, std::vector<double>(static_cast<std::size_t>(nx) * ny, 0.0)};
  if (points.empty()) return grid;
  const double cw = region.width() / nx;
  const double ch = region.height() / ny;
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  // The kernel factorizes: exp(-(dx^2 + dy^2) / 2s^2) = ex(dx) * ey(dy).
  std::vector<double> ex(static_cast<std::size_t>(nx));
  std::vector<double> ey(static_cast<std::size_t>(ny));
  for (const Point2& p : points) {
    for (int i = 0; i < nx; ++i) {
      const double dx = region.x_min() + (i + 0.5) * cw - p.x;
      ex[static_cast<std::size_t>(i)] = std::exp(-dx * dx * inv2s2);
    }
    for (int j = 0; j < ny; ++j) {
      const double dy = region.y_min() + (j + 0.5) * ch - p.y;
      ey[static_cast<std::size_t>(j)] = std::exp(-dy * dy * inv2s2);
    }
    for (int j = 0; j < ny; ++j) {
      double* row = grid.values.data() + static_cast<std::size_t>(j) * nx;
      const double w = ey[static_cast<std::size_t>(j)];
      for (int i = 0; i < nx; ++i) row[i] += w * ex[static_cast<std::size_t>(i)];
    }
  }
  const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma * static_cast<double>(points.size()));
  for (double& v : grid.values) v *= norm;
  return grid;
}

DensityGrid heatmap(const Dataset& data, int nx, int ny, double sigma) {
  std::vector<Point2> points;
  for (const auto& t : data.trajectories) points.insert(points.end(), t.points().begin(), t.points().end());
  return heatmap(points, data.region, nx, ny, sigma);
}

void write_density_csv(std::ostream& out, const DensityGrid& grid) {
  const auto old = out.precision(17);
  out << "nx,ny,x_min,y_min,x_max,y_max\n";
  out << grid.nx << ',' << grid.ny << ',' << grid.region.x_min() << ',' << grid.region.y_min() << ','
      << grid.region.x_max() << ',' << grid.region.y_max() << '\n';
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (i > 0) out << ',';
      out << grid.at(i, j);
    }
    out << '\n';
  }
  out.precision(old);
}

BoundaryDensity entry_boundary_density(std::span<const Point2> entries,
                                       const RegionOfInterest& region, double bandwidth) {
  if (entries.empty()) throw ContractError("entry_boundary_density: no entry points");
  if (!(bandwidth > 0.0)) throw DomainError("entry_boundary_density: bandwidth must be positive");
  const double per = region.perimeter();
  const double width = per / kBoundarySamples;
  BoundaryDensity out;
  out.perimeter = per;
  out.positions.resize(kBoundarySamples);
  out.density.assign(kBoundarySamples, 0.0);
  for (int j = 0; j < kBoundarySamples; ++j) out.positions[static_cast<std::size_t>(j)] = (j + 0.5) * width;

  const int images = static_cast<int>(std::ceil(8.0 * bandwidth / per)) + 1;
  const double inv = 1.0 / (bandwidth * std::numbers::sqrt2);
  std::vector<double> edge_cdf(kBoundarySamples + 1);
  for (const Point2& p : entries) {
    const double s = region.boundary_arclength(p);
    // Mass of the wrapped kernel in each bin via differences of the normal CDF.
    for (int j = 0; j <= kBoundarySamples; ++j) {
      const double edge = j * width;
      double acc = 0.0;
      for (int k = -images; k <= images; ++k) acc += 0.5 * std::erf((edge - s + k * per) * inv);
      edge_cdf[static_cast<std::size_t>(j)] = acc;
    }
    for (int j = 0; j < kBoundarySamples; ++j) {
      out.density[static_cast<std::size_t>(j)] +=
          edge_cdf[static_cast<std::size_t>(j) + 1] - edge_cdf[static_cast<std::size_t>(j)];
    }
  }
  const double scale = 1.0 / (static_cast<double>(entries.size()) * width);
  for (double& d : out.density) d *= scale;
  return out;
}

double dtw_distance(const Trajectory& a, const Trajectory& b, double length_weight) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m, inf);
  std::vector<double> cur(m, inf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double cost = distance(a[i], b[j]);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = inf;
        if (i > 0) best = std::min(best, prev[j]);
        if (j > 0) best = std::min(best, cur[j - 1]);
        if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      }
      cur[j] = cost + best;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1] + length_weight * std::abs(a.duration() - b.duration());
}

std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows()) throw ContractError("hungarian: cost matrix must be square");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Potentials and matching, 1-based with a virtual column 0.
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0);  // match[col] = row
  std::vector<std::size_t> way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> min_v(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double reduced = cost(static_cast<Eigen::Index>(r0 - 1), static_cast<Eigen::Index>(col - 1)) -
                               u[r0] - v[col];
        if (reduced < min_v[col]) {
          min_v[col] = reduced;
          way[col] = col0;
        }
        if (min_v[col] < delta) {
          delta = min_v[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          min_v[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t col = 1; col <= n; ++col) assignment[match[col] - 1] = col - 1;
  return assignment;
}

EmdResult emd(const Eigen::MatrixXd& ground) {
  if (ground.rows() != ground.cols()) {
    throw ContractError("emd: sets must have equal size (got " + std::to_string(ground.rows()) +
                        " and " + std::to_string(ground.cols()) +
                        "); subsample the larger set first");
  }
  if (ground.rows() == 0) throw ContractError("emd: empty sets");
  if ((ground.array() < 0.0).any()) throw DomainError("emd: ground distances must be nonnegative");
  const auto n = static_cast<std::size_t>(ground.rows());
  EmdResult result;
  result.assignment = hungarian(ground);
  result.plan.weights = Eigen::MatrixXd::Zero(ground.rows(), ground.cols());
  const double w = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto c = static_cast<Eigen::Index>(result.assignment[i]);
    result.plan.weights(r, c) = w;
    total += ground(r, c);
  }
  result.value = total / static_cast<double>(n);
  return result;
}

std::vector<std::size_t> subsample_indices(std::size_t total, std::size_t n, std::uint64_t seed) {
  if (n > total) throw ContractError("subsample_indices: n exceeds population");
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Histogram ipd_histogram(std::span<const std::vector<Point2>> frames, double bin_width) {
  if (!(bin_width > 0.0)) throw DomainError("ipd_histogram: bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  std::vector<double> counts;
  for (const auto& frame : frames) {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      for (std::size_t j = i + 1; j < frame.size(); ++j) {
        const auto bin = static_cast<std::size_t>(std::floor(distance(frame[i], frame[j]) / bin_width));
        if (bin >= counts.size()) counts.resize(bin + 1, 0.0);
        counts[bin] += 1.0;
        ++h.pair_count;
      }
    }
  }
  if (h.pair_count == 0) throw ContractError("ipd_histogram: no frame contains two agents");
  const double inv = 1.0 / static_cast<double>(h.pair_count);
  h.mass.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) h.mass[k] = counts[k] * inv;
  return h;
}

}  // namespace crowdforge::metrics
