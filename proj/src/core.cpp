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

#include "crowdforge/core.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "crowdforge/errors.hpp"

namespace crowdforge {

Trajectory::Trajectory(std::vector<Point2> points, double dt, std::string id)
    : points_(std::move(points)), dt_(dt), id_(std::move(id)) {
  if (points_.size() < 2) {
    throw DomainError("trajectory needs at least 2 points, got " +
                      std::to_string(points_.size()));
  }
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw DomainError("trajectory dt must be positive and finite");
  }
  for (const auto& p : points_) {
    if (!is_finite(p)) throw DomainError("trajectory contains a non-finite point");
  }
}

Point2 Trajectory::eval_at(double t) const {
  const double total = duration();
  if (!(t >= 0.0 && t <= total)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "eval_at: t=" << t << " outside [0, T=" << total << "]";
    throw DomainError(msg.str());
  }
  const double u = t / dt_;
  const double nearest = std::round(u);
  // Snap so that t = i * dt returns sample i bit-exactly.
  if (std::abs(u - nearest) <= 1e-12 * std::max(1.0, u)) {
    return points_[std::min(static_cast<std::size_t>(nearest), points_.size() - 1)];
  }
  auto i = static_cast<std::size_t>(std::floor(u));
  if (i >= points_.size() - 1) return points_.back();
  const double a = u - static_cast<double>(i);
  if (a == 0.0) return points_[i];
  return points_[i] + a * (points_[i + 1] - points_[i]);
}

RegionOfInterest::RegionOfInterest(double x_min, double y_min, double x_max, double y_max)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
  if (!(x_min < x_max) || !(y_min < y_max) || !std::isfinite(x_min) ||
      !std::isfinite(y_min) || !std::isfinite(x_max) || !std::isfinite(y_max)) {
    throw DomainError("degenerate region of interest");
  }
}

Point2 RegionOfInterest::project_to_boundary(const Point2& p) const {
  if (!contains(p)) {
    return {std::clamp(p.x, x_min_, x_max_), std::clamp(p.y, y_min_, y_max_)};
  }
  const std::array<double, 4> d = {p.y - y_min_, x_max_ - p.x, y_max_ - p.y, p.x - x_min_};
  const auto edge = std::min_element(d.begin(), d.end()) - d.begin();
  switch (edge) {
    case 0: return {p.x, y_min_};
    case 1: return {x_max_, p.y};
    case 2: return {p.x, y_max_};
    default: return {x_min_, p.y};
  }
}

double RegionOfInterest::distance_to_boundary(const Point2& p) const {
  return distance(p, project_to_boundary(p));
}

double RegionOfInterest::boundary_arclength(const Point2& p) const {
  Point2 q = p;
  if (distance_to_boundary(p) > kBoundaryEpsilon || !contains(p)) q = project_to_boundary(p);
  const double w = width();
  const double h = height();
  // Pick the edge the (near-)boundary point is closest to, in traversal order.
  const std::array<double, 4> d = {std::abs(q.y - y_min_), std::abs(q.x - x_max_),
                                   std::abs(q.y - y_max_), std::abs(q.x - x_min_)};
  const auto edge = std::min_element(d.begin(), d.end()) - d.begin();
  double s = 0.0;
  switch (edge) {
    case 0: s = std::clamp(q.x - x_min_, 0.0, w); break;
    case 1: s = w + std::clamp(q.y - y_min_, 0.0, h); break;
    case 2: s = w + h + std::clamp(x_max_ - q.x, 0.0, w); break;
    default: s = 2.0 * w + h + std::clamp(y_max_ - q.y, 0.0, h); break;
  }
  const double per = perimeter();
  if (s >= per) s -= per;
  return s;
}

Point2 RegionOfInterest::point_at_arclength(double s) const {
  const double w = width();
  const double h = height();
  const double per = perimeter();
  s = std::fmod(s, per);
  if (s < 0.0) s += per;
  if (s <= w) return {x_min_ + s, y_min_};
  if (s <= w + h) return {x_max_, y_min_ + (s - w)};
  if (s <= 2.0 * w + h) return {x_max_ - (s - w - h), y_max_};
  return {x_min_, y_max_ - (s - 2.0 * w - h)};
}

std::mt19937_64 make_stream(std::uint64_t seed, RngStream id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

std::vector<Trajectory> subtrajectories(const Trajectory& traj, std::size_t len) {
  if (len < 2) throw DomainError("subtrajectories: window length must be >= 2");
  std::vector<Trajectory> out;
  if (traj.size() < len) return out;
  const auto& pts = traj.points();
  out.reserve(traj.size() - len + 1);
  for (std::size_t k = 0; k + len <= pts.size(); ++k) {
    out.emplace_back(std::vector<Point2>(pts.begin() + static_cast<std::ptrdiff_t>(k),
                                         pts.begin() + static_cast<std::ptrdiff_t>(k + len)),
                     traj.dt(), traj.id());
  }
  return out;
}

}  // namespace crowdforge
