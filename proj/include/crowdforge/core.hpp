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

// Domain model shared by every module: points, fixed-interval trajectories,
// the rectangular region of interest and datasets of trajectories.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace crowdforge {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator/(const Vec2& a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

// Positions in meters. Velocities reuse Vec2 in m/s.
using Point2 = Vec2;

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
// z-component of the 3D cross product.
constexpr double det(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
constexpr double abs_sq(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(abs_sq(a)); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline bool is_finite(const Vec2& a) { return std::isfinite(a.x) && std::isfinite(a.y); }

// Tolerance used when deciding whether a point lies on the region boundary.
inline constexpr double kBoundaryEpsilon = 1e-6;

// A trajectory sampled at a fixed interval: point i has timestamp i * dt.
class Trajectory {
 public:
  // Throws DomainError when fewer than two points, dt <= 0 or a point is
  // not finite.
  Trajectory(std::vector<Point2> points, double dt, std::string id = {});

  const std::vector<Point2>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point2& operator[](std::size_t i) const { return points_[i]; }
  const Point2& front() const { return points_.front(); }
  const Point2& back() const { return points_.back(); }
  double dt() const { return dt_; }
  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  // T = (n - 1) * dt.
  double duration() const { return static_cast<double>(points_.size() - 1) * dt_; }

  // Continuous view: piecewise-linear interpolation. Exact at multiples of dt.
  // Throws DomainError for t outside [0, T].
  Point2 eval_at(double t) const;

 private:
  std::vector<Point2> points_;
  double dt_;
  std::string id_;
};

// Axis-aligned rectangle. Points on the boundary count as inside.
class RegionOfInterest {
 public:
  RegionOfInterest(double x_min, double y_min, double x_max, double y_max);

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double x_max() const { return x_max_; }
  double y_max() const { return y_max_; }
  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double perimeter() const { return 2.0 * (width() + height()); }
  Point2 center() const { return {0.5 * (x_min_ + x_max_), 0.5 * (y_min_ + y_max_)}; }

  bool contains(const Point2& p) const {
    return x_min_ <= p.x && p.x <= x_max_ && y_min_ <= p.y && p.y <= y_max_;
  }

  // Closest point on the boundary. Inside points go to the nearest edge
  // (ties resolved bottom, right, top, left); outside points are clamped.
  Point2 project_to_boundary(const Point2& p) const;

  // Distance from p to the boundary curve.
  double distance_to_boundary(const Point2& p) const;

  // Arc-length coordinate in [0, perimeter): bottom edge left to right,
  // right edge bottom to top, top edge right to left, left edge top to
  // bottom. Points off the boundary are projected first.
  double boundary_arclength(const Point2& p) const;

  // Inverse of boundary_arclength; s is wrapped into [0, perimeter).
  Point2 point_at_arclength(double s) const;

  friend bool operator==(const RegionOfInterest&, const RegionOfInterest&) = default;

 private:
  double x_min_, y_min_, x_max_, y_max_;
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  RegionOfInterest region;
  double dt;

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }
};

// Independent random streams derived from one seed, one per consumer.
enum class RngStream : std::uint32_t { kInit = 1, kTrain = 2, kGenerate = 3, kArrivals = 4 };
std::mt19937_64 make_stream(std::uint64_t seed, RngStream id);

// All contiguous windows of exactly len points, in order. Empty when the
// trajectory is shorter than len. Throws DomainError for len < 2.
std::vector<Trajectory> subtrajectories(const Trajectory& traj, std::size_t len);

}  // namespace crowdforge
