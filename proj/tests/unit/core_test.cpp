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

#include <gtest/gtest.h>

#include <random>

#include "crowdforge/errors.hpp"

namespace crowdforge {
namespace {

TEST(TrajectoryTest, EvalAtMidpoint) {
  const Trajectory traj({{0, 0}, {1, 0}}, 0.4);
  EXPECT_EQ(traj.eval_at(0.2), (Point2{0.5, 0.0}));
  EXPECT_EQ(traj.eval_at(0.0), (Point2{0.0, 0.0}));
}

TEST(TrajectoryTest, EvalAtSecondSegment) {
  const Trajectory traj({{0, 0}, {2, 0}, {2, 2}}, 0.4);
  const Point2 p = traj.eval_at(0.6);
  EXPECT_NEAR(p.x, 2.0, 1e-12);
  EXPECT_NEAR(p.y, 1.0, 1e-12);
}

TEST(TrajectoryTest, EvalAtSamplesIsExact) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  std::vector<Point2> pts(40);
  for (auto& p : pts) p = {coord(rng), coord(rng)};
  for (double dt : {0.1, 0.4, 0.7, 1.0 / 3.0}) {
    const Trajectory traj(pts, dt);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_EQ(traj.eval_at(static_cast<double>(i) * dt), pts[i]) << "dt=" << dt << " i=" << i;
    }
  }
}

TEST(TrajectoryTest, EvalAtIsLipschitzWithinSegment) {
  const Trajectory traj({{0, 0}, {1, 2}, {-3, 2}}, 0.5);
  // Local speeds are |(1,2)|/0.5 and 4/0.5.
  const double v1 = std::sqrt(5.0) / 0.5;
  const double h = 1e-3;
  for (double t = 0.0; t + h <= 0.5; t += 0.01) {
    EXPECT_LE(distance(traj.eval_at(t), traj.eval_at(t + h)), v1 * h + 1e-12);
  }
}

TEST(TrajectoryTest, EvalAtOutOfRangeNamesTime) {
  const Trajectory traj({{0, 0}, {1, 0}}, 0.4);
  try {
    traj.eval_at(0.5);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("t=0.5"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("T=0.4"), std::string::npos);
  }
  EXPECT_THROW(traj.eval_at(-1e-9), DomainError);
}

TEST(TrajectoryTest, InvariantsEnforced) {
  EXPECT_THROW(Trajectory({{0, 0}}, 0.4), DomainError);
  EXPECT_THROW(Trajectory({{0, 0}, {1, 1}}, 0.0), DomainError);
  EXPECT_THROW(Trajectory({{0, 0}, {std::nan(""), 1}}, 0.4), DomainError);
  const Trajectory traj({{0, 0}, {1, 0}, {2, 0}}, 0.4);
  EXPECT_DOUBLE_EQ(traj.duration(), 0.8);
}

TEST(RegionTest, Contains) {
  const RegionOfInterest r(0, 0, 10, 5);
  EXPECT_TRUE(r.contains({5, 2}));
  EXPECT_TRUE(r.contains({10, 5}));
  EXPECT_FALSE(r.contains({10.001, 2}));
}

TEST(RegionTest, Degenerate) {
  EXPECT_THROW(RegionOfInterest(0, 0, 0, 5), DomainError);
  EXPECT_THROW(RegionOfInterest(0, 5, 1, 5), DomainError);
}

TEST(RegionTest, BoundaryArclength) {
  const RegionOfInterest r(0, 0, 10, 5);
  EXPECT_DOUBLE_EQ(r.boundary_arclength({0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(r.boundary_arclength({10, 2}), 12.0);
  EXPECT_DOUBLE_EQ(r.boundary_arclength({5, 5}), 20.0);
  EXPECT_DOUBLE_EQ(r.boundary_arclength({0, 1}), 29.0);
  // Off-boundary points are projected first.
  EXPECT_DOUBLE_EQ(r.boundary_arclength({5, -3}), 5.0);
  EXPECT_DOUBLE_EQ(r.boundary_arclength({9.5, 2}), 12.0);
}

TEST(RegionTest, ArclengthRoundTrip) {
  const RegionOfInterest r(-3.5, 1.25, 12.0, 7.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> s_dist(0.0, r.perimeter());
  for (int i = 0; i < 10000; ++i) {
    const double s = s_dist(rng);
    const Point2 p = r.point_at_arclength(s);
    EXPECT_LE(r.distance_to_boundary(p), 1e-12);
    EXPECT_NEAR(r.boundary_arclength(p), s, 1e-9);
  }
}

TEST(SubtrajectoriesTest, WindowCounts) {
  std::vector<Point2> pts;
  for (int i = 0; i < 6; ++i) pts.push_back({static_cast<double>(i), 0.0});
  const Trajectory six(pts, 0.4, "a");
  const auto windows = subtrajectories(six, 5);
  ASSERT_EQ(windows.size(), 2u);
  EXPECT_EQ(windows[0].front(), pts[0]);
  EXPECT_EQ(windows[0].back(), pts[4]);
  EXPECT_EQ(windows[1].front(), pts[1]);
  EXPECT_EQ(windows[1].back(), pts[5]);
  EXPECT_DOUBLE_EQ(windows[1].dt(), 0.4);

  pts.pop_back();
  const Trajectory five(pts, 0.4);
  const auto one = subtrajectories(five, 5);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].points(), five.points());

  pts.pop_back();
  EXPECT_TRUE(subtrajectories(Trajectory(pts, 0.4), 5).empty());
  EXPECT_THROW(subtrajectories(five, 1), DomainError);
}

TEST(SubtrajectoriesTest, CountAndPrefixProperty) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> n_dist(2, 30);
  std::uniform_int_distribution<int> len_dist(2, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = n_dist(rng);
    const int len = len_dist(rng);
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) pts.push_back({static_cast<double>(i), static_cast<double>(i * i)});
    const auto windows = subtrajectories(Trajectory(pts, 0.4), static_cast<std::size_t>(len));
    ASSERT_EQ(windows.size(), static_cast<std::size_t>(std::max(0, n - len + 1)));
    for (std::size_t k = 0; k < windows.size(); ++k) EXPECT_EQ(windows[k].front(), pts[k]);
  }
}

}  // namespace
}  // namespace crowdforge
