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

// Reciprocal velocity obstacles: pairwise half-plane constraints in velocity
// space and the small linear programs that pick a velocity from them.

#include <cstdint>
#include <span>
#include <vector>

#include "crowdforge/core.hpp"

namespace crowdforge::orca {

struct OrcaConfig {
  double time_horizon = 2.0;
  double neighbor_dist = 10.0;
  std::size_t max_neighbors = 10;
  double share = 0.5;

  void validate() const;
};

// Velocity v satisfies the constraint iff dot(v - point, normal) >= 0.
struct HalfPlane {
  Vec2 point;
  Vec2 normal;

  // Direction of the boundary line with the feasible side on its left.
  Vec2 direction() const { return {normal.y, -normal.x}; }
  double margin(const Vec2& v) const { return dot(v - point, normal); }
};

// What the constraint builder needs to know about an agent.
struct Body {
  std::uint64_t id = 0;
  Point2 position;
  Vec2 velocity;
  double radius = 0.25;
};

// True when the two centers coincide and the constraint falls back to the
// x axis.
bool coincident(const Body& self, const Body& other);

HalfPlane orca_constraint(const Body& self, const Body& other, double time_horizon,
                          double frame_dt, double share = 0.5);

// Velocity of norm <= max_speed closest to preferred that satisfies every
// constraint. When no such velocity exists, the one minimizing the largest
// violation. Constraints are processed in the given order.
Vec2 solve_velocity(std::span<const HalfPlane> constraints, const Vec2& preferred,
                    double max_speed);

// Neighbors within cfg.neighbor_dist, nearest first (ties by id), at most
// cfg.max_neighbors, returned sorted by id.
std::vector<std::size_t> select_neighbors(const Body& self, std::span<const Body> others,
                                          const OrcaConfig& cfg);

// Full per-agent pipeline: neighbors, constraints in id order, solve.
Vec2 avoid(const Body& self, std::span<const Body> others, const Vec2& preferred,
           double max_speed, double frame_dt, const OrcaConfig& cfg);

}  // namespace crowdforge::orca
