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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "crowdforge/errors.hpp"

namespace crowdforge::sim {
namespace {

Trajectory straight(Point2 from, Vec2 velocity, int n, double dt = 0.4) {
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back(from + (i * dt) * velocity);
  return Trajectory(pts, dt);
}

AgentState agent_on(const Trajectory& traj, Point2 at, long frames_alive) {
  AgentState a;
  a.trajectory = std::make_shared<const Trajectory>(traj);
  a.position = at;
  a.frames_alive = frames_alive;
  return a;
}

TEST(ArrivalsTest, EmptyForZeroDuration) {
  std::mt19937_64 rng(1);
  EXPECT_TRUE(schedule_arrivals(2.0, 0.0, rng).empty());
  EXPECT_THROW(schedule_arrivals(0.0, 1.0, rng), DomainError);
}

TEST(ArrivalsTest, MeanGapMatchesLambda) {
  std::mt19937_64 rng(2024);
  const auto times = schedule_arrivals(2.0, 2.0 * 110000, rng);
  ASSERT_GE(times.size(), 100001u);
  double prev = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < 100000; ++i) {
    sum += times[i] - prev;
    prev = times[i];
  }
  EXPECT_NEAR(sum / 100000.0, 2.0, 0.02 * 2.0);
}

TEST(ArrivalsTest, IncreasingBoundedDeterministic) {
  std::mt19937_64 a(5);
  std::mt19937_64 b(5);
  const auto ta = schedule_arrivals(1.5, 100.0, a);
  EXPECT_EQ(ta, schedule_arrivals(1.5, 100.0, b));
  ASSERT_FALSE(ta.empty());
  EXPECT_GT(ta.front(), 0.0);
  EXPECT_LE(ta.back(), 100.0);
  EXPECT_TRUE(std::is_sorted(ta.begin(), ta.end(), std::less_equal<>()) &&
              std::adjacent_find(ta.begin(), ta.end()) == ta.end());
}

TEST(PreferredVelocityTest, Examples) {
  const FollowConfig follow{5.0, 2.0};
  const auto line = straight({0, 0}, {1, 0}, 101, 0.2);  // 20 s at 1 m/s
  const Vec2 v0 = preferred_velocity(agent_on(line, {0, 0}, 0), follow, 0.1);
  EXPECT_NEAR(v0.x, 1.0, 1e-12);
  EXPECT_NEAR(v0.y, 0.0, 1e-12);
  // Blocked at the origin at t = 10: raw (15 - 0) / 5 = 3 m/s, clamped.
  const Vec2 v1 = preferred_velocity(agent_on(line, {0, 0}, 100), follow, 0.1);
  EXPECT_NEAR(v1.x, 2.0, 1e-12);
  EXPECT_NEAR(v1.y, 0.0, 1e-12);
  const Trajectory still({{3, 3}, {3, 3}, {3, 3}}, 0.4);
  EXPECT_EQ(preferred_velocity(agent_on(still, {3, 3}, 2), follow, 0.1), (Vec2{0, 0}));
}

TEST(PreferredVelocityTest, AfterEndHeadsToGoal) {
  const FollowConfig follow{5.0, 2.0};
  const auto line = straight({0, 0}, {1, 0}, 3, 0.4);
  const Vec2 v = preferred_velocity(agent_on(line, {0.75, 0}, 9), follow, 0.1);
  EXPECT_NEAR(v.x, 0.5, 1e-12);
  EXPECT_NEAR(v.y, 0.0, 1e-12);
  const Vec2 far = preferred_velocity(agent_on(line, {-5, 0}, 20), follow, 0.1);
  EXPECT_NEAR(norm(far), 2.0, 1e-12);
}

TEST(PreferredVelocityTest, BoundedAndExactOnLines) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> c(-5, 5);
  std::uniform_real_distribution<double> s(-1.4, 1.4);
  const FollowConfig follow{5.0, 2.0};
  for (int k = 0; k < 500; ++k) {
    const Vec2 vel{s(rng), s(rng)};
    const auto line = straight({c(rng), c(rng)}, vel, 60, 0.4);
    const long frames = k % 200;
    const double t = frames * 0.1;
    const Vec2 on = preferred_velocity(agent_on(line, line.eval_at(t), frames), follow, 0.1);
    EXPECT_LE(norm(on), 2.0 + 1e-12);
    if (norm(vel) <= 2.0) {
      EXPECT_NEAR(on.x, vel.x, 1e-12);
      EXPECT_NEAR(on.y, vel.y, 1e-12);
    }
    const Vec2 off = preferred_velocity(agent_on(line, {c(rng), c(rng)}, frames), follow, 0.1);
    EXPECT_LE(norm(off), 2.0 + 1e-12);
  }
}

SimConfig quiet_config() {
  SimConfig cfg;
  cfg.frame_dt = 0.1;
  cfg.arrival_mean = 2.0;
  return cfg;
}

TEST(SimStepTest, EmptyWorldOnlyAdvancesClock) {
  World w = make_world({}, {});
  sim_step(w, quiet_config());
  sim_step(w, quiet_config());
  EXPECT_EQ(w.frame, 2);
  EXPECT_TRUE(w.agents.empty());
  EXPECT_TRUE(w.completed.empty());
}

TEST(SimStepTest, SingleAgentAdvancesAlongLine) {
  World w = make_world({straight({0, 0}, {1, 0}, 26, 0.4)}, {0.0});
  const auto cfg = quiet_config();
  sim_step(w, cfg);
  ASSERT_EQ(w.agents.size(), 1u);
  for (int k = 1; k < 20; ++k) {
    EXPECT_NEAR(w.agents[0].position.x, 0.1 * k, 1e-12);
    EXPECT_NEAR(w.agents[0].position.y, 0.0, 1e-12);
    sim_step(w, cfg);
  }
}

World crowded_world() {
  std::vector<Trajectory> trajs;
  std::vector<double> arrivals;
  for (int i = 0; i < 8; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 8.0;
    const Point2 from{4 * std::cos(a), 4 * std::sin(a)};
    trajs.push_back(straight(from, -0.25 * from, 30, 0.4));
    arrivals.push_back(0.0);
  }
  return make_world(trajs, arrivals);
}

TEST(SimStepTest, PermutationInvariant) {
  const auto cfg = quiet_config();
  World a = crowded_world();
  World b = crowded_world();
  std::mt19937_64 rng(4);
  for (int step = 0; step < 60; ++step) {
    sim_step(a, cfg);
    sim_step(b, cfg);
    std::shuffle(b.agents.begin(), b.agents.end(), rng);
    std::map<std::uint64_t, Point2> pa;
    for (const auto& ag : a.agents) pa[ag.id] = ag.position;
    ASSERT_EQ(pa.size(), b.agents.size());
    for (const auto& ag : b.agents) {
      EXPECT_NEAR(ag.position.x, pa[ag.id].x, 1e-12);
      EXPECT_NEAR(ag.position.y, pa[ag.id].y, 1e-12);
    }
  }
}

TEST(SimStepTest, CountsAndSpeedLimit) {
  const auto cfg = quiet_config();
  World w = crowded_world();
  std::set<std::uint64_t> seen;
  for (int step = 0; step < 400 && (step == 0 || !w.agents.empty()); ++step) {
    std::map<std::uint64_t, Point2> before;
    for (const auto& ag : w.agents) before[ag.id] = ag.position;
    sim_step(w, cfg);
    EXPECT_EQ(w.agents.size(), w.stats.inserted - w.stats.removed);
    for (const auto& ag : w.agents) {
      seen.insert(ag.id);
      if (before.count(ag.id)) {
        EXPECT_LE(distance(ag.position, before[ag.id]), cfg.follow.max_speed * cfg.frame_dt + 1e-12);
      }
    }
  }
  EXPECT_TRUE(w.agents.empty());
  EXPECT_EQ(seen.size(), 8u);
  EXPECT_EQ(w.completed.size(), 8u);
}

TEST(SimStepTest, HeadOnKeepsClearance) {
  const auto cfg = quiet_config();
  World w = make_world({straight({0, 0}, {1, 0}, 21, 0.4), straight({8, 0}, {-1, 0}, 21, 0.4)},
                       {0.0, 0.0});
  double closest = 8.0;
  do {
    sim_step(w, cfg);
    if (w.agents.size() == 2) {
      closest = std::min(closest, distance(w.agents[0].position, w.agents[1].position));
    }
  } while (!w.agents.empty());
  EXPECT_GE(closest, 0.5 - 1e-3);
}

TEST(SimStepTest, TimeoutRemovesUnreachableGoal) {
  auto cfg = quiet_config();
  cfg.timeout = 1.0;
  // 10 m/s schedule with a 2 m/s speed cap: the agent is still far at T + 1.
  World w = make_world({straight({0, 0}, {10, 0}, 11, 0.4)}, {0.0});
  int steps = 0;
  do {
    sim_step(w, cfg);
    ++steps;
  } while (!w.agents.empty());
  EXPECT_EQ(steps, 50);
  EXPECT_EQ(w.stats.timeouts, 1u);
  EXPECT_TRUE(w.completed[0].timed_out);
}

TEST(RunSimulationTest, ZeroDurationIsEmpty) {
  SimConfig cfg = quiet_config();
  cfg.duration = 0.0;
  const auto r = run_simulation({straight({0, 0}, {1, 0}, 5)}, cfg);
  EXPECT_TRUE(r.trajectories.empty());
  EXPECT_EQ(r.stats.inserted, 0u);
}

// Runs one agent in free space and returns its per-frame path.
std::vector<Point2> lone_run(const Trajectory& traj) {
  World w = make_world({traj}, {0.0});
  const auto cfg = quiet_config();
  do {
    sim_step(w, cfg);
  } while (!w.agents.empty());
  return w.completed.at(0).path;
}

TEST(RunSimulationTest, StraightLineReproducedExactly) {
  const auto traj = straight({1, 2}, {0.6, -1.2}, 30, 0.4);
  const auto path = lone_run(traj);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double t = std::min(0.1 * static_cast<double>(k), traj.duration());
    EXPECT_LT(distance(path[k], traj.eval_at(t)), 1e-6);
  }
}

TEST(RunSimulationTest, GentleCurveFollowedClosely) {
  // The look-ahead steers along a 5 s chord, so the deviation grows with
  // curvature; 0.3 m of sway over 40 m already reaches about 0.07 m.
  std::vector<Point2> pts;
  for (int i = 0; i < 60; ++i) {
    const double x = 0.4 * i;
    pts.push_back({x, 0.15 * std::sin(2.0 * std::numbers::pi * x / 40.0)});
  }
  const Trajectory traj(pts, 0.4);
  const auto path = lone_run(traj);
  double worst = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double t = std::min(0.1 * static_cast<double>(k), traj.duration());
    worst = std::max(worst, distance(path[k], traj.eval_at(t)));
  }
  EXPECT_LE(worst, 0.05);
}

TEST(RunSimulationTest, OutputOnGlobalGridAndDeterministic) {
  SimConfig cfg = quiet_config();
  cfg.duration = 30.0;
  cfg.arrival_mean = 1.0;
  cfg.seed = 17;
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 5; ++i) trajs.push_back(straight({0, 1.0 * i}, {1, 0.1 * i}, 20));
  const auto a = run_simulation(trajs, cfg);
  const auto b = run_simulation(trajs, cfg);
  ASSERT_EQ(a.trajectories.size(), b.trajectories.size());
  ASSERT_FALSE(a.trajectories.empty());
  EXPECT_EQ(a.start_frames, b.start_frames);
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    EXPECT_EQ(a.trajectories[i].points(), b.trajectories[i].points());
    EXPECT_EQ(a.trajectories[i].dt(), 0.4);
  }
  // Every output sample is the frame-level position at a multiple of 4 frames.
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    const auto& rec = a.records[i];
    const long offset = a.start_frames[i] * 4 - rec.insertion_frame;
    EXPECT_GE(offset, 0);
    EXPECT_LT(offset, 4);
    for (std::size_t k = 0; k < a.trajectories[i].size(); ++k) {
      EXPECT_EQ(a.trajectories[i][k], rec.path[static_cast<std::size_t>(offset) + 4 * k]);
    }
  }
  EXPECT_GT(a.stats.cycled, 0u);
  EXPECT_EQ(a.stats.inserted, a.stats.removed);
}

TEST(SimConfigTest, RejectsFractionalOutputStride) {
  SimConfig cfg;
  cfg.output_dt = 0.25;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg.output_dt = 0.4;
  EXPECT_EQ(cfg.output_stride(), 4);
}

}  // namespace
}  // namespace crowdforge::sim
