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

#include "crowdforge/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crowdforge/errors.hpp"

namespace crowdforge::sim {
namespace {

Vec2 clamp_norm(const Vec2& v, double max_norm) {
  const double n = norm(v);
  if (n > max_norm) return v * (max_norm / n);
  return v;
}

// Compares local time against the trajectory end with a little slack for
// the frame counter arithmetic.
bool reached(double t, double end) { return t >= end - 1e-9; }

}  // namespace

void SimConfig::validate() const {
  if (!(frame_dt > 0.0)) throw DomainError("frame_dt must be positive");
  if (!(arrival_mean > 0.0)) throw DomainError("arrival mean must be positive");
  if (!(duration >= 0.0)) throw DomainError("duration must be non-negative");
  if (!(follow.window > 0.0)) throw DomainError("follow window must be positive");
  if (!(follow.max_speed > 0.0)) throw DomainError("max speed must be positive");
  if (!(radius > 0.0)) throw DomainError("agent radius must be positive");
  if (!(timeout >= 0.0)) throw DomainError("timeout must be non-negative");
  orca.validate();
  output_stride();
}

long SimConfig::output_stride() const {
  const double ratio = output_dt / frame_dt;
  const double rounded = std::round(ratio);
  if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw DomainError("output_dt must be a whole multiple of frame_dt");
  }
  return static_cast<long>(rounded);
}

std::vector<double> schedule_arrivals(double lambda, double duration, std::mt19937_64& rng) {
  if (!(lambda > 0.0)) throw DomainError("schedule_arrivals: lambda must be positive");
  std::exponential_distribution<double> gap(1.0 / lambda);
  std::vector<double> times;
  double t = 0.0;
  while (true) {
    const double g = gap(rng);
    if (g == 0.0) continue;
    t += g;
    if (t > duration) break;
    times.push_back(t);
  }
  return times;
}

Vec2 preferred_velocity(const AgentState& agent, const FollowConfig& follow, double frame_dt) {
  const Trajectory& traj = *agent.trajectory;
  const double t = agent.local_time(frame_dt);
  const double end = traj.duration();
  if (reached(t, end)) {
    return clamp_norm((traj.back() - agent.position) / frame_dt, follow.max_speed);
  }
  const double t_att = std::min(t + follow.window, end);
  const Point2 target = traj.eval_at(t_att);
  return clamp_norm((target - agent.position) / (t_att - t), follow.max_speed);
}

World make_world(std::vector<Trajectory> trajectories, std::vector<double> arrivals) {
  World w;
  for (auto& t : trajectories) w.trajectories.push_back(std::make_shared<const Trajectory>(std::move(t)));
  w.arrivals.assign(arrivals.begin(), arrivals.end());
  return w;
}

void sim_step(World& world, const SimConfig& cfg) {
  const double dt = cfg.frame_dt;
  const double clock = world.clock(dt);

  while (!world.arrivals.empty() && world.arrivals.front() <= clock + 1e-12) {
    world.arrivals.pop_front();
    if (world.trajectories.empty()) {
      throw ContractError("sim_step: arrival scheduled but no trajectories available");
    }
    if (world.next_trajectory >= world.trajectories.size()) {
      world.next_trajectory = 0;
    }
    if (world.stats.inserted >= world.trajectories.size()) ++world.stats.cycled;
    AgentState a;
    a.id = world.next_id++;
    a.trajectory = world.trajectories[world.next_trajectory];
    a.position = a.trajectory->front();
    a.radius = cfg.radius;
    a.insertion_frame = world.frame;
    a.path.push_back(a.position);
    world.agent_trajectory.push_back(world.next_trajectory);
    ++world.next_trajectory;
    ++world.stats.inserted;
    world.agents.push_back(std::move(a));
  }

  // Planning phase reads only this snapshot.
  std::vector<orca::Body> bodies;
  bodies.reserve(world.agents.size());
  for (const auto& a : world.agents) bodies.push_back({a.id, a.position, a.velocity, a.radius});
  std::vector<Vec2> next_velocity(world.agents.size());
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    const Vec2 pref = preferred_velocity(world.agents[i], cfg.follow, dt);
    for (const auto& other : bodies) {
      if (other.id > bodies[i].id && orca::coincident(bodies[i], other)) ++world.stats.coincident_pairs;
    }
    next_velocity[i] = orca::avoid(bodies[i], bodies, pref, cfg.follow.max_speed, dt, cfg.orca);
  }

  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    auto& a = world.agents[i];
    a.velocity = next_velocity[i];
    a.position += dt * a.velocity;
    ++a.frames_alive;
    a.path.push_back(a.position);
  }
  ++world.frame;
  ++world.stats.frames;

  std::vector<AgentState> staying;
  staying.reserve(world.agents.size());
  for (auto& a : world.agents) {
    const double t = a.local_time(dt);
    const double end = a.trajectory->duration();
    const bool arrived = reached(t, end) && distance(a.position, a.trajectory->back()) <= cfg.goal_tolerance;
    const bool expired = !arrived && reached(t, end + cfg.timeout);
    if (!arrived && !expired) {
      staying.push_back(std::move(a));
      continue;
    }
    ++world.stats.removed;
    if (expired) ++world.stats.timeouts;
    world.completed.push_back({a.id, world.agent_trajectory[a.id], a.insertion_frame,
                               std::move(a.path), expired});
  }
  world.agents = std::move(staying);
}

SimResult run_simulation(const std::vector<Trajectory>& trajectories, const SimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng = make_stream(cfg.seed, RngStream::kArrivals);
  auto arrivals = schedule_arrivals(cfg.arrival_mean, cfg.duration, rng);
  if (!arrivals.empty() && trajectories.empty()) {
    throw ContractError("run_simulation: no trajectories to assign");
  }
  World world = make_world(trajectories, std::move(arrivals));
  while (!world.arrivals.empty() || !world.agents.empty()) sim_step(world, cfg);

  SimResult out;
  out.dt = cfg.output_dt;
  const long stride = cfg.output_stride();
  for (const auto& rec : world.completed) {
    // Sample on the global output grid so that frames line up across agents.
    const long first = (rec.insertion_frame + stride - 1) / stride * stride;
    std::vector<Point2> pts;
    for (long f = first; f - rec.insertion_frame < static_cast<long>(rec.path.size()); f += stride) {
      pts.push_back(rec.path[static_cast<std::size_t>(f - rec.insertion_frame)]);
    }
    if (pts.size() < 2) {
      ++world.stats.too_short;
      continue;
    }
    out.trajectories.emplace_back(std::move(pts), cfg.output_dt, std::to_string(rec.id));
    out.start_frames.push_back(first / stride);
  }
  out.records = std::move(world.completed);
  out.stats = world.stats;
  return out;
}

}  // namespace crowdforge::sim
