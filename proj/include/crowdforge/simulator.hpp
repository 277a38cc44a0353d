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

// Discrete-step crowd simulation: agents arrive at exponential intervals,
// follow their assigned trajectory in time and resolve collisions with ORCA.

#include <cstdint>
#include <deque>
#include <memory>
#include <random>
#include <vector>

#include "crowdforge/core.hpp"
#include "crowdforge/orca.hpp"

namespace crowdforge::sim {

struct FollowConfig {
  double window = 5.0;
  double max_speed = 2.0;
};

struct SimConfig {
  double frame_dt = 0.1;
  double arrival_mean = 2.0;
  double duration = 0.0;
  FollowConfig follow;
  orca::OrcaConfig orca;
  std::uint64_t seed = 0;
  double radius = 0.25;
  double output_dt = 0.4;
  double goal_tolerance = 0.25;
  double timeout = 10.0;

  // Throws DomainError on non-positive intervals or an output_dt that is not
  // a whole number of frames.
  void validate() const;
  long output_stride() const;
};

struct AgentState {
  std::uint64_t id = 0;
  Point2 position;
  Vec2 velocity;
  double radius = 0.25;
  std::shared_ptr<const Trajectory> trajectory;
  long insertion_frame = 0;
  long frames_alive = 0;  // local time t = frames_alive * frame_dt
  std::vector<Point2> path;  // position at every frame since insertion

  double local_time(double frame_dt) const { return static_cast<double>(frames_alive) * frame_dt; }
};

struct AgentRecord {
  std::uint64_t id = 0;
  std::size_t trajectory_index = 0;
  long insertion_frame = 0;
  std::vector<Point2> path;
  bool timed_out = false;
};

struct SimStats {
  std::size_t inserted = 0;
  std::size_t removed = 0;
  std::size_t timeouts = 0;
  std::size_t cycled = 0;  // arrivals that reused a trajectory
  std::size_t too_short = 0;  // realized paths with fewer than 2 output samples
  std::size_t coincident_pairs = 0;
  long frames = 0;
};

struct World {
  long frame = 0;
  std::vector<AgentState> agents;
  std::deque<double> arrivals;
  std::vector<std::shared_ptr<const Trajectory>> trajectories;
  std::vector<std::size_t> agent_trajectory;  // by agent id
  std::size_t next_trajectory = 0;
  std::uint64_t next_id = 0;
  std::vector<AgentRecord> completed;
  SimStats stats;

  double clock(double frame_dt) const { return static_cast<double>(frame) * frame_dt; }
};

// Arrival times 0 < t1 < t2 < ... <= duration with exponential gaps of mean
// lambda. Throws DomainError for lambda <= 0.
std::vector<double> schedule_arrivals(double lambda, double duration, std::mt19937_64& rng);

Vec2 preferred_velocity(const AgentState& agent, const FollowConfig& follow, double frame_dt);

World make_world(std::vector<Trajectory> trajectories, std::vector<double> arrivals);

// Insert, plan from one snapshot, integrate, remove finished agents.
void sim_step(World& world, const SimConfig& cfg);

struct SimResult {
  double dt = 0.4;
  std::vector<Trajectory> trajectories;  // realized paths at output_dt
  std::vector<long> start_frames;  // in output_dt units
  std::vector<AgentRecord> records;  // per-frame paths, in removal order
  SimStats stats;
};

// Runs until the schedule is exhausted and every agent has left.
SimResult run_simulation(const std::vector<Trajectory>& trajectories, const SimConfig& cfg);

}  // namespace crowdforge::sim
