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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

#include "crowdforge/errors.hpp"

namespace crowdforge::ingest {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Returns true and sets dt if the comment line is a dt header.
bool parse_dt_header(std::string_view comment, double& dt) {
  comment = trim(comment.substr(1));
  constexpr std::string_view key = "dt=";
  if (comment.substr(0, key.size()) != key) return false;
  const std::string value(trim(comment.substr(key.size())));
  char* end = nullptr;
  dt = std::strtod(value.c_str(), &end);
  return end != value.c_str() && *end == '\0';
}

// Liang-Barsky: parameter interval of segment a->b inside the rectangle.
bool clip_segment(const RegionOfInterest& r, const Point2& a, const Point2& b, double& s0,
                  double& s1) {
  s0 = 0.0;
  s1 = 1.0;
  const Vec2 d = b - a;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {a.x - r.x_min(), r.x_max() - a.x, a.y - r.y_min(), r.y_max() - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double s = q[i] / p[i];
    if (p[i] < 0.0) {
      s0 = std::max(s0, s);
    } else {
      s1 = std::min(s1, s);
    }
  }
  return s0 <= s1;
}

Point2 lerp(const Point2& a, const Point2& b, double s) { return a + s * (b - a); }

// Position along the sampled polyline at continuous time t (in dt units).
Point2 polyline_at(const std::vector<Point2>& pts, double u) {
  if (u <= 0.0) return pts.front();
  const auto last = static_cast<double>(pts.size() - 1);
  if (u >= last) return pts.back();
  const auto i = static_cast<std::size_t>(std::floor(u));
  const double a = u - static_cast<double>(i);
  if (a == 0.0) return pts[i];
  return lerp(pts[i], pts[i + 1], a);
}

}  // namespace

TrackFile parse_trajectory_file(std::istream& in) {
  TrackFile file;
  bool have_dt = false;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> sample_lines;
  std::vector<std::vector<std::size_t>> lines_of;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      double dt = 0.0;
      if (parse_dt_header(body, dt)) {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ParseError("dt must be positive", line_no);
        file.dt = dt;
        have_dt = true;
      }
      continue;
    }
    std::istringstream fields{std::string(body)};
    std::string id;
    std::string frame_text;
    std::string x_text;
    std::string y_text;
    std::string extra;
    if (!(fields >> id >> frame_text >> x_text >> y_text) || (fields >> extra)) {
      throw ParseError("expected 'agent_id frame_index x y'", line_no);
    }
    TimedSample s;
    {
      const auto* first = frame_text.data();
      const auto* last = first + frame_text.size();
      const auto [ptr, ec] = std::from_chars(first, last, s.frame);
      if (ec != std::errc() || ptr != last) throw ParseError("bad frame index '" + frame_text + "'", line_no);
    }
    char* end = nullptr;
    s.position.x = std::strtod(x_text.c_str(), &end);
    if (*end != '\0' || end == x_text.c_str()) throw ParseError("bad x '" + x_text + "'", line_no);
    s.position.y = std::strtod(y_text.c_str(), &end);
    if (*end != '\0' || end == y_text.c_str()) throw ParseError("bad y '" + y_text + "'", line_no);
    if (!is_finite(s.position)) throw ParseError("non-finite coordinate", line_no);
    auto [it, inserted] = index.try_emplace(id, file.tracks.size());
    if (inserted) {
      file.tracks.push_back(RawTrack{id, {}});
      lines_of.emplace_back();
    }
    file.tracks[it->second].samples.push_back(s);
    lines_of[it->second].push_back(line_no);
  }
  if (!have_dt) throw FormatError("missing '# dt=<seconds>' header");

  std::vector<RawTrack> kept;
  kept.reserve(file.tracks.size());
  for (std::size_t k = 0; k < file.tracks.size(); ++k) {
    auto& track = file.tracks[k];
    std::vector<std::size_t> order(track.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return track.samples[a].frame < track.samples[b].frame;
    });
    std::vector<TimedSample> sorted;
    sorted.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& s = track.samples[order[i]];
      if (i > 0 && s.frame == sorted.back().frame) {
        throw DataError("agent '" + track.id + "' repeats frame " + std::to_string(s.frame) +
                        " (line " + std::to_string(lines_of[k][order[i]]) + ")");
      }
      sorted.push_back(s);
      sorted.back().t = static_cast<double>(s.frame) * file.dt;
    }
    track.samples = std::move(sorted);
    if (track.samples.size() < 2) {
      file.single_sample_ids.push_back(track.id);
    } else {
      kept.push_back(std::move(track));
    }
  }
  file.tracks = std::move(kept);
  return file;
}

TrackFile load_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trajectory file '" + path + "'");
  return parse_trajectory_file(in);
}

Trajectory resample(const RawTrack& track, double dt) {
  if (!(dt > 0.0)) throw DomainError("resample: dt must be positive");
  if (track.samples.size() < 2) throw DataError("resample: track '" + track.id + "' has < 2 samples");
  const double t_start = track.samples.front().t;
  const double t_end = track.samples.back().t;
  const double tol = 1e-9 * dt;
  if (t_end - t_start + tol < dt) {
    throw DataError("resample: track '" + track.id + "' is shorter than dt");
  }
  const auto count = static_cast<std::size_t>(std::floor((t_end - t_start + tol) / dt)) + 1;
  std::vector<Point2> points;
  points.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = t_start + static_cast<double>(k) * dt;
    while (seg + 2 < track.samples.size() && track.samples[seg + 1].t <= t + tol) ++seg;
    const auto& a = track.samples[seg];
    const auto& b = track.samples[seg + 1];
    if (std::abs(t - a.t) <= tol) {
      points.push_back(a.position);
    } else if (std::abs(t - b.t) <= tol) {
      points.push_back(b.position);
    } else {
      points.push_back(lerp(a.position, b.position, (t - a.t) / (b.t - a.t)));
    }
  }
  return Trajectory(std::move(points), dt, track.id);
}

ClipResult clip_and_filter_roi(const std::vector<Trajectory>& tracks,
                               const RegionOfInterest& region) {
  if (tracks.empty()) return {Dataset{{}, region, 0.0}, 0};
  const double dt = tracks.front().dt();
  ClipResult result{Dataset{{}, region, dt}, 0};
  for (const auto& track : tracks) {
    if (std::abs(track.dt() - dt) > 1e-12 * dt) {
      throw DataError("clip_and_filter_roi: tracks do not share dt");
    }
    const auto& pts = track.points();
    const std::size_t n = pts.size();
    bool kept_any = false;
    std::size_t run_index = 0;
    std::size_t i = 0;
    while (i < n) {
      if (!region.contains(pts[i])) {
        ++i;
        continue;
      }
      const std::size_t a = i;
      while (i < n && region.contains(pts[i])) ++i;
      const std::size_t b = i - 1;

      double u_entry = 0.0;
      double u_exit = 0.0;
      bool enters = false;
      bool exits = false;
      double s0 = 0.0;
      double s1 = 0.0;
      if (a > 0) {
        if (clip_segment(region, pts[a - 1], pts[a], s0, s1)) {
          enters = true;
          u_entry = static_cast<double>(a - 1) + s0;
        }
      } else if (region.distance_to_boundary(pts[a]) <= kBoundaryEpsilon) {
        enters = true;
        u_entry = 0.0;
      }
      if (b + 1 < n) {
        if (clip_segment(region, pts[b], pts[b + 1], s0, s1)) {
          exits = true;
          u_exit = static_cast<double>(b) + s1;
        }
      } else if (region.distance_to_boundary(pts[b]) <= kBoundaryEpsilon) {
        exits = true;
        u_exit = static_cast<double>(b);
      }
      if (!enters || !exits || !(u_exit > u_entry)) continue;

      const double span = u_exit - u_entry;  // in units of dt
      const auto count = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(span)) + 1);
      std::vector<Point2> clipped;
      clipped.reserve(count);
      for (std::size_t k = 0; k + 1 < count; ++k) {
        clipped.push_back(polyline_at(pts, u_entry + static_cast<double>(k)));
      }
      clipped.push_back(polyline_at(pts, u_exit));
      // Crossing points carry rounding error of a few ulps; pin them to R.
      for (auto& p : clipped) {
        p = {std::clamp(p.x, region.x_min(), region.x_max()),
             std::clamp(p.y, region.y_min(), region.y_max())};
      }
      std::string id = track.id();
      if (run_index > 0) id += "#" + std::to_string(run_index);
      ++run_index;
      result.dataset.trajectories.emplace_back(std::move(clipped), dt, std::move(id));
      kept_any = true;
    }
    if (!kept_any) ++result.dropped;
  }
  return result;
}

void write_trajectory_file(std::ostream& out, double dt, const std::vector<Trajectory>& trajs,
                           const std::vector<long>& start_frames) {
  if (!start_frames.empty() && start_frames.size() != trajs.size()) {
    throw ContractError("write_trajectory_file: start_frames size mismatch");
  }
  const auto old_precision = out.precision(17);
  out << "# dt=" << dt << "\n";
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const auto& traj = trajs[k];
    const std::string id = traj.id().empty() ? std::to_string(k) : traj.id();
    const long offset = start_frames.empty() ? 0 : start_frames[k];
    for (std::size_t i = 0; i < traj.size(); ++i) {
      out << id << ' ' << offset + static_cast<long>(i) << ' ' << traj[i].x << ' ' << traj[i].y
          << '\n';
    }
  }
  out.precision(old_precision);
}

std::vector<std::vector<Point2>> frames_from_tracks(const TrackFile& file) {
  std::map<long, std::vector<Point2>> by_frame;
  for (const auto& track : file.tracks) {
    for (const auto& s : track.samples) by_frame[s.frame].push_back(s.position);
  }
  std::vector<std::vector<Point2>> frames;
  frames.reserve(by_frame.size());
  for (auto& [frame, positions] : by_frame) frames.push_back(std::move(positions));
  return frames;
}

}  // namespace crowdforge::ingest
