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

#include "crowdforge/ingest.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "crowdforge/errors.hpp"

namespace crowdforge::ingest {
namespace {

TrackFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_trajectory_file(in);
}

TEST(ParseTest, SingleTrack) {
  const auto file = parse("# dt=0.4\n1 0 0.0 0.0\n1 1 0.4 0.0\n");
  EXPECT_DOUBLE_EQ(file.dt, 0.4);
  ASSERT_EQ(file.tracks.size(), 1u);
  const auto& s = file.tracks[0].samples;
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s[0].t, 0.0);
  EXPECT_EQ(s[0].position, (Point2{0, 0}));
  EXPECT_DOUBLE_EQ(s[1].t, 0.4);
  EXPECT_EQ(s[1].position, (Point2{0.4, 0}));
}

TEST(ParseTest, EmptyBody) {
  EXPECT_TRUE(parse("# dt=0.4\n").tracks.empty());
  EXPECT_TRUE(parse("# some comment\n# dt=0.4\n\n").tracks.empty());
}

TEST(ParseTest, InterleavedIdsMatchGroupingOracle) {
  std::mt19937_64 rng(5);
  std::vector<std::tuple<std::string, long, double, double>> rows;
  for (long f = 0; f < 30; ++f) {
    rows.emplace_back("a", f, f * 0.1, 1.0);
    rows.emplace_back("b", f + 3, -1.0, f * 0.2);
  }
  std::shuffle(rows.begin(), rows.end(), rng);
  std::ostringstream text;
  text.precision(17);
  text << "# dt=0.4\n";
  for (const auto& [id, f, x, y] : rows) text << id << ' ' << f << ' ' << x << ' ' << y << '\n';

  // Oracle: group by id, sort by frame.
  std::map<std::string, std::map<long, Point2>> oracle;
  for (const auto& [id, f, x, y] : rows) oracle[id][f] = {x, y};

  const auto file = parse(text.str());
  ASSERT_EQ(file.tracks.size(), 2u);
  for (const auto& track : file.tracks) {
    const auto& expected = oracle.at(track.id);
    ASSERT_EQ(track.samples.size(), expected.size());
    std::size_t i = 0;
    for (const auto& [f, p] : expected) {
      EXPECT_EQ(track.samples[i].frame, f);
      EXPECT_DOUBLE_EQ(track.samples[i].t, f * 0.4);
      EXPECT_EQ(track.samples[i].position, p);
      ++i;
    }
  }
}

TEST(ParseTest, Errors) {
  EXPECT_THROW(parse("1 0 0 0\n1 1 1 0\n"), FormatError);
  try {
    parse("# dt=0.4\n1 0 0 0\n1 x 1 0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("# dt=0.4\n1 0 0\n"), ParseError);
  EXPECT_THROW(parse("# dt=0.4\n1 0 0 0 9\n"), ParseError);
  EXPECT_THROW(parse("# dt=0.4\n1 0 0 0\n1 0 1 0\n"), DataError);
}

TEST(ParseTest, SingleSampleIdsAreReported) {
  const auto file = parse("# dt=0.4\n1 0 0 0\n2 0 1 1\n2 1 2 2\n");
  ASSERT_EQ(file.tracks.size(), 1u);
  EXPECT_EQ(file.tracks[0].id, "2");
  ASSERT_EQ(file.single_sample_ids.size(), 1u);
  EXPECT_EQ(file.single_sample_ids[0], "1");
}

RawTrack raw(std::vector<std::pair<double, Point2>> samples) {
  RawTrack t{"r", {}};
  for (auto& [time, p] : samples) t.samples.push_back({0, time, p});
  return t;
}

TEST(ResampleTest, Linear) {
  const auto traj = resample(raw({{0.0, {0, 0}}, {0.8, {0.8, 0}}}), 0.4);
  ASSERT_EQ(traj.size(), 3u);
  EXPECT_NEAR(traj[1].x, 0.4, 1e-12);
  EXPECT_NEAR(traj[2].x, 0.8, 1e-12);
}

TEST(ResampleTest, Idempotent) {
  const auto file = parse("# dt=0.4\n7 10 1.5 2.5\n7 11 1.75 2.0\n7 12 3.0 -1.0\n7 13 3.3 0.1\n");
  const auto traj = resample(file.tracks[0], 0.4);
  ASSERT_EQ(traj.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(traj[i], file.tracks[0].samples[i].position);
}

TEST(ResampleTest, PiecewiseLinearOracle) {
  const auto traj = resample(raw({{0.0, {0, 0}}, {0.5, {1, 0}}, {1.0, {2, 0}}}), 0.4);
  ASSERT_EQ(traj.size(), 3u);
  EXPECT_NEAR(traj[0].x, 0.0, 1e-12);
  EXPECT_NEAR(traj[1].x, 0.8, 1e-12);
  EXPECT_NEAR(traj[2].x, 1.6, 1e-12);
}

TEST(ResampleTest, TooShort) {
  EXPECT_THROW(resample(raw({{0.0, {0, 0}}, {0.3, {1, 0}}}), 0.4), DataError);
}

TEST(ClipTest, FullyOutsideDropped) {
  const RegionOfInterest r(0, 0, 10, 5);
  const Trajectory t({{-5, -5}, {-4, -5}, {-3, -5}}, 0.4);
  const auto res = clip_and_filter_roi({t}, r);
  EXPECT_TRUE(res.dataset.empty());
  EXPECT_EQ(res.dropped, 1u);
}

TEST(ClipTest, StartingInsideDropped) {
  const RegionOfInterest r(0, 0, 10, 5);
  const Trajectory t({{5, 2}, {6, 2}, {7, 2}}, 0.4);
  const auto res = clip_and_filter_roi({t}, r);
  EXPECT_TRUE(res.dataset.empty());
  EXPECT_EQ(res.dropped, 1u);
}

TEST(ClipTest, CrossingKeptAndClipped) {
  const RegionOfInterest r(0, 0, 10, 5);
  std::vector<Point2> pts;
  for (int i = 0; i < 14; ++i) pts.push_back({-1.3 + 1.0 * i, 2.0 + 0.05 * i});
  const auto res = clip_and_filter_roi({Trajectory(pts, 0.4, "x")}, r);
  ASSERT_EQ(res.dataset.size(), 1u);
  EXPECT_EQ(res.dropped, 0u);
  const auto& c = res.dataset.trajectories[0];
  // Segment/rectangle intersection oracle: x = 0 at u = 1.3, x = 10 at u = 11.3.
  EXPECT_NEAR(c.front().x, 0.0, kBoundaryEpsilon);
  EXPECT_NEAR(c.front().y, 2.0 + 0.05 * 1.3, 1e-12);
  EXPECT_NEAR(c.back().x, 10.0, kBoundaryEpsilon);
  EXPECT_NEAR(c.back().y, 2.0 + 0.05 * 11.3, 1e-12);
  EXPECT_EQ(c.size(), 11u);
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    EXPECT_TRUE(r.contains(c[i]));
    EXPECT_NEAR(c[i].x, static_cast<double>(i), 1e-12);  // uniform dt from the entry crossing
  }
}

TEST(ClipTest, MultipleRunsAndBoundaryStart) {
  const RegionOfInterest r(0, 0, 10, 5);
  // Starts on the boundary, exits, re-enters, exits again.
  const Trajectory t({{0, 2}, {2, 2}, {2, 6}, {4, 6}, {4, 2}, {6, 2}, {6, -2}}, 0.4, "m");
  const auto res = clip_and_filter_roi({t}, r);
  ASSERT_EQ(res.dataset.size(), 2u);
  EXPECT_EQ(res.dataset.trajectories[0].id(), "m");
  EXPECT_EQ(res.dataset.trajectories[1].id(), "m#1");
  for (const auto& c : res.dataset.trajectories) {
    EXPECT_LE(r.distance_to_boundary(c.front()), kBoundaryEpsilon);
    EXPECT_LE(r.distance_to_boundary(c.back()), kBoundaryEpsilon);
    for (const auto& p : c.points()) EXPECT_TRUE(r.contains(p));
  }
}

TEST(ClipTest, RandomTracksSatisfyOutputInvariants) {
  const RegionOfInterest r(0, 0, 10, 5);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> step(0.0, 0.6);
  std::vector<Trajectory> tracks;
  for (int k = 0; k < 300; ++k) {
    std::vector<Point2> pts{{-2.0, 2.5}};
    for (int i = 0; i < 40; ++i) pts.push_back(pts.back() + Vec2{0.4 + step(rng), step(rng)});
    tracks.emplace_back(pts, 0.4, std::to_string(k));
  }
  const auto a = clip_and_filter_roi(tracks, r);
  const auto b = clip_and_filter_roi(tracks, r);
  ASSERT_EQ(a.dataset.size(), b.dataset.size());
  EXPECT_GT(a.dataset.size(), 0u);
  for (std::size_t i = 0; i < a.dataset.size(); ++i) {
    const auto& c = a.dataset.trajectories[i];
    EXPECT_EQ(c.points(), b.dataset.trajectories[i].points());
    EXPECT_LE(r.distance_to_boundary(c.front()), kBoundaryEpsilon);
    EXPECT_LE(r.distance_to_boundary(c.back()), kBoundaryEpsilon);
    for (const auto& p : c.points()) EXPECT_TRUE(r.contains(p));
  }
}

TEST(WriteTest, RoundTripThroughParser) {
  const Trajectory t1({{0.1, 0.2}, {1.0 / 3.0, 2.0 / 7.0}}, 0.4, "p");
  const Trajectory t2({{5, 5}, {6, 6}, {7, 7}}, 0.4, "q");
  std::ostringstream out;
  write_trajectory_file(out, 0.4, {t1, t2}, {3, 0});
  const auto file = parse(out.str());
  ASSERT_EQ(file.tracks.size(), 2u);
  EXPECT_EQ(file.tracks[0].samples[0].frame, 3);
  EXPECT_EQ(file.tracks[0].samples[1].position, t1[1]);
  const auto frames = frames_from_tracks(file);
  ASSERT_EQ(frames.size(), 5u);
  EXPECT_EQ(frames[0].size(), 1u);
}

}  // namespace
}  // namespace crowdforge::ingest
