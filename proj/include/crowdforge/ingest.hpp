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

// Recorded-track ingestion. The canonical text format is
//
//   # dt=0.4
//   <agent_id> <frame_index> <x> <y>
//   ...
//
// with '#' comment lines allowed anywhere and sample time = frame_index * dt.
// Simulator output uses the same format.

#include <iosfwd>
#include <string>
#include <vector>

#include "crowdforge/core.hpp"

namespace crowdforge::ingest {

struct TimedSample {
  long frame = 0;
  double t = 0.0;
  Point2 position;
};

struct RawTrack {
  std::string id;
  std::vector<TimedSample> samples;  // strictly increasing t
};

struct TrackFile {
  double dt = 0.0;
  std::vector<RawTrack> tracks;  // ids in order of first appearance
  std::vector<std::string> single_sample_ids;  // ids skipped for having one sample
};

// Throws ParseError (with line number) for malformed data lines, FormatError
// when the '# dt=' header is missing, DataError for a repeated frame index.
TrackFile parse_trajectory_file(std::istream& in);
TrackFile load_trajectory_file(const std::string& path);

// Samples at t_start, t_start + dt, ... up to the last multiple <= t_end,
// re-based to start at 0. Throws DataError when the track is shorter than dt.
Trajectory resample(const RawTrack& track, double dt);

struct ClipResult {
  Dataset dataset;
  std::size_t dropped = 0;
};

// Keeps the inside runs of each track that both enter and exit the region
// and clips them to the boundary crossings. See README for the exact rules.
ClipResult clip_and_filter_roi(const std::vector<Trajectory>& tracks,
                               const RegionOfInterest& region);

// Writes trajectories in the canonical format. start_frames, when given,
// offsets each trajectory's frame indices (absolute timing for IPD).
void write_trajectory_file(std::ostream& out, double dt, const std::vector<Trajectory>& trajs,
                           const std::vector<long>& start_frames = {});

// Groups all samples of a file by frame index: one position list per frame
// that has at least one agent, in increasing frame order.
std::vector<std::vector<Point2>> frames_from_tracks(const TrackFile& file);

}  // namespace crowdforge::ingest
