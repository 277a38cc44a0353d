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

#include "crowdforge/orca.hpp"

#include <algorithm>
#include <cmath>

#include "crowdforge/errors.hpp"

namespace crowdforge::orca {
namespace {

constexpr double kParallel = 1e-10;

Vec2 left_normal(const Vec2& d) { return {-d.y, d.x}; }

Vec2 unit(const Vec2& v) { return v / norm(v); }

// Closest feasible point on the boundary of constraint `line`, subject to
// lines [0, line) and the speed disc. Returns false when that segment is empty.
bool solve_on_line(std::span<const HalfPlane> lines, std::size_t line, double radius,
                   const Vec2& target, bool direction_opt, Vec2& result) {
  const Vec2 p = lines[line].point;
  const Vec2 d = lines[line].direction();
  const double along = dot(p, d);
  const double disc = along * along + radius * radius - abs_sq(p);
  if (disc < 0.0) return false;
  const double root = std::sqrt(disc);
  double t_left = -along - root;
  double t_right = -along + root;

  for (std::size_t i = 0; i < line; ++i) {
    const Vec2 di = lines[i].direction();
    const double denominator = det(d, di);
    const double numerator = det(di, p - lines[i].point);
    if (std::abs(denominator) <= kParallel) {
      if (numerator < 0.0) return false;
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    result = p + (dot(target, d) > 0.0 ? t_right : t_left) * d;
  } else {
    const double t = std::clamp(dot(d, target - p), t_left, t_right);
    result = p + t * d;
  }
  return true;
}

// Returns the index of the first constraint that cannot be met, or
// lines.size() on success.
std::size_t solve_2d(std::span<const HalfPlane> lines, double radius, const Vec2& target,
                     bool direction_opt, Vec2& result) {
  if (direction_opt) {
    result = target * radius;
  } else if (abs_sq(target) > radius * radius) {
    result = unit(target) * radius;
  } else {
    result = target;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].margin(result) < 0.0) {
      const Vec2 keep = result;
      if (!solve_on_line(lines, i, radius, target, direction_opt, result)) {
        result = keep;
        return i;
      }
    }
  }
  return lines.size();
}

// Minimizes the largest violation by sweeping the failed constraints and
// solving a projected 2D program for each.
void solve_fallback(std::span<const HalfPlane> lines, std::size_t begin, double radius,
                    Vec2& result) {
  double worst = 0.0;
  for (std::size_t i = begin; i < lines.size(); ++i) {
    if (-lines[i].margin(result) <= worst) continue;
    const Vec2 di = lines[i].direction();
    std::vector<HalfPlane> projected;
    projected.reserve(i);
    for (std::size_t j = 0; j < i; ++j) {
      const Vec2 dj = lines[j].direction();
      const double determinant = det(di, dj);
      Vec2 point;
      if (std::abs(determinant) <= kParallel) {
        if (dot(di, dj) > 0.0) continue;
        point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        point = lines[i].point + (det(dj, lines[i].point - lines[j].point) / determinant) * di;
      }
      const Vec2 direction = unit(dj - di);
      projected.push_back({point, left_normal(direction)});
    }
    const Vec2 keep = result;
    if (solve_2d(projected, radius, lines[i].normal, true, result) < projected.size()) {
      // Only reachable through rounding; the previous result is feasible.
      result = keep;
    }
    worst = -lines[i].margin(result);
  }
}

}  // namespace

void OrcaConfig::validate() const {
  if (!(time_horizon > 0.0)) throw DomainError("orca time_horizon must be positive");
  if (!(neighbor_dist > 0.0)) throw DomainError("orca neighbor_dist must be positive");
  if (!(share > 0.0 && share <= 1.0)) throw DomainError("orca share must lie in (0, 1]");
}

bool coincident(const Body& self, const Body& other) {
  return abs_sq(other.position - self.position) == 0.0;
}

HalfPlane orca_constraint(const Body& self, const Body& other, double time_horizon,
                          double frame_dt, double share) {
  if (self.id == other.id) throw ContractError("orca_constraint: agents must be distinct");
  const Vec2 rel_pos = other.position - self.position;
  const Vec2 rel_vel = self.velocity - other.velocity;
  const double dist_sq = abs_sq(rel_pos);
  const double r = self.radius + other.radius;
  const double r_sq = r * r;

  Vec2 direction;
  Vec2 u;
  if (dist_sq > r_sq) {
    const double inv_tau = 1.0 / time_horizon;
    const Vec2 w = rel_vel - inv_tau * rel_pos;
    const double w_len_sq = abs_sq(w);
    const double w_dot_p = dot(w, rel_pos);
    if (w_dot_p < 0.0 && w_dot_p * w_dot_p > r_sq * w_len_sq) {
      // Closest boundary point lies on the cut-off circle.
      const double w_len = std::sqrt(w_len_sq);
      const Vec2 unit_w = w / w_len;
      direction = {unit_w.y, -unit_w.x};
      u = (r * inv_tau - w_len) * unit_w;
    } else {
      const double leg = std::sqrt(dist_sq - r_sq);
      if (det(rel_pos, w) > 0.0) {
        direction = Vec2{rel_pos.x * leg - rel_pos.y * r, rel_pos.x * r + rel_pos.y * leg} /
                    dist_sq;
      } else {
        direction = -Vec2{rel_pos.x * leg + rel_pos.y * r, -rel_pos.x * r + rel_pos.y * leg} /
                    dist_sq;
      }
      u = dot(rel_vel, direction) * direction - rel_vel;
    }
  } else {
    const double inv_dt = 1.0 / frame_dt;
    const Vec2 w = rel_vel - inv_dt * rel_pos;
    const double w_len = norm(w);
    Vec2 unit_w;
    if (w_len > 0.0) {
      unit_w = w / w_len;
    } else {
      // Same place, same velocity: separate along x, lower id to the right.
      unit_w = {self.id < other.id ? 1.0 : -1.0, 0.0};
    }
    direction = {unit_w.y, -unit_w.x};
    u = (r * inv_dt - w_len) * unit_w;
  }
  return {self.velocity + share * u, left_normal(direction)};
}

Vec2 solve_velocity(std::span<const HalfPlane> constraints, const Vec2& preferred,
                    double max_speed) {
  if (!(max_speed > 0.0)) throw DomainError("solve_velocity: max_speed must be positive");
  Vec2 result;
  const std::size_t failed = solve_2d(constraints, max_speed, preferred, false, result);
  if (failed < constraints.size()) solve_fallback(constraints, failed, max_speed, result);
  return result;
}

std::vector<std::size_t> select_neighbors(const Body& self, std::span<const Body> others,
                                          const OrcaConfig& cfg) {
  const double range_sq = cfg.neighbor_dist * cfg.neighbor_dist;
  std::vector<std::pair<double, std::size_t>> near;
  for (std::size_t i = 0; i < others.size(); ++i) {
    if (others[i].id == self.id) continue;
    const double d = abs_sq(others[i].position - self.position);
    if (d < range_sq) near.emplace_back(d, i);
  }
  auto closer = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return others[a.second].id < others[b.second].id;
  };
  if (near.size() > cfg.max_neighbors) {
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(cfg.max_neighbors),
                      near.end(), closer);
    near.resize(cfg.max_neighbors);
  }
  std::vector<std::size_t> out;
  out.reserve(near.size());
  for (const auto& n : near) out.push_back(n.second);
  std::sort(out.begin(), out.end(),
            [&](std::size_t a, std::size_t b) { return others[a].id < others[b].id; });
  return out;
}

Vec2 avoid(const Body& self, std::span<const Body> others, const Vec2& preferred,
           double max_speed, double frame_dt, const OrcaConfig& cfg) {
  std::vector<HalfPlane> lines;
  for (std::size_t i : select_neighbors(self, others, cfg)) {
    lines.push_back(orca_constraint(self, others[i], cfg.time_horizon, frame_dt, cfg.share));
  }
  return solve_velocity(lines, preferred, max_speed);
}

}  // namespace crowdforge::orca
