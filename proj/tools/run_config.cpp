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

#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "crowdforge/errors.hpp"

namespace crowdforge::app {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double positive(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (!(x > 0.0)) throw ConfigError(key + ": must be positive");
  return x;
}

double non_negative(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x < 0.0) throw ConfigError(key + ": must be non-negative");
  return x;
}

RegionOfInterest to_region(const std::string& key, const std::string& v) {
  std::vector<double> xs;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) xs.push_back(to_double(key, trim(part)));
  if (xs.size() != 4) throw ConfigError(key + ": expected x_min,y_min,x_max,y_max");
  try {
    return RegionOfInterest(xs[0], xs[1], xs[2], xs[3]);
  } catch (const DomainError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value,
                                  const std::filesystem::path& base)>;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  const std::filesystem::path p(v);
  return p.is_absolute() ? p : base / p;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset", [](RunConfig& c, auto&, auto& v, auto& b) { c.dataset = resolve(b, v); }},
      {"model", [](RunConfig& c, auto&, auto& v, auto& b) { c.model = resolve(b, v); }},
      {"output_dir", [](RunConfig& c, auto&, auto& v, auto& b) { c.output_dir = resolve(b, v); }},
      {"region", [](RunConfig& c, auto& k, auto& v, auto&) { c.region = to_region(k, v); }},
      {"seed", [](RunConfig& c, auto& k, auto& v, auto&) { c.seed = to_count(k, v); }},
      {"log_every", [](RunConfig& c, auto& k, auto& v, auto&) { c.log_every = to_count(k, v); }},
      {"train.iterations",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.train.iterations = to_count(k, v); }},
      {"train.unroll", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.unroll = to_count(k, v); }},
      {"train.batch_size",
       [](RunConfig& c, auto& k, auto& v, auto&) {
         c.train.batch_size = to_count(k, v);
         if (c.train.batch_size == 0) throw ConfigError(k + ": must be at least 1");
       }},
      {"train.l2_weight",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.train.l2_weight = non_negative(k, v); }},
      {"train.d_steps", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.d_steps = to_count(k, v); }},
      {"train.n_max",
       [](RunConfig& c, auto& k, auto& v, auto&) {
         c.train.n_max = to_count(k, v);
         if (c.train.n_max < 2) throw ConfigError(k + ": must be at least 2");
       }},
      {"train.margin", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.margin = non_negative(k, v); }},
      {"train.learning_rate",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.train.adam.learning_rate = positive(k, v); }},
      {"generate.n_max",
       [](RunConfig& c, auto& k, auto& v, auto&) {
         c.generate_n_max = to_count(k, v);
         if (c.generate_n_max < 2) throw ConfigError(k + ": must be at least 2");
       }},
      {"sim.frame_dt", [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.frame_dt = positive(k, v); }},
      {"sim.arrival_mean",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.arrival_mean = positive(k, v); }},
      {"sim.duration", [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.duration = non_negative(k, v); }},
      {"sim.window", [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.follow.window = positive(k, v); }},
      {"sim.max_speed",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.follow.max_speed = positive(k, v); }},
      {"sim.radius", [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.radius = positive(k, v); }},
      {"sim.output_dt", [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.output_dt = positive(k, v); }},
      {"sim.goal_tolerance",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.goal_tolerance = positive(k, v); }},
      {"sim.timeout", [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.timeout = non_negative(k, v); }},
      {"sim.time_horizon",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.orca.time_horizon = positive(k, v); }},
      {"sim.neighbor_dist",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.orca.neighbor_dist = positive(k, v); }},
      {"sim.max_neighbors",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.sim.orca.max_neighbors = to_count(k, v); }},
      {"metrics.kde_bandwidth",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.metrics.kde_bandwidth = positive(k, v); }},
      {"metrics.boundary_bandwidth",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.metrics.boundary_bandwidth = positive(k, v); }},
      {"metrics.dtw_length_weight",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.metrics.dtw_length_weight = non_negative(k, v); }},
      {"metrics.ipd_bin_width",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.metrics.ipd_bin_width = positive(k, v); }},
      {"metrics.grid_nx",
       [](RunConfig& c, auto& k, auto& v, auto&) {
         c.metrics.grid_nx = static_cast<int>(to_count(k, v));
         if (c.metrics.grid_nx < 1) throw ConfigError(k + ": must be at least 1");
       }},
      {"metrics.grid_ny",
       [](RunConfig& c, auto& k, auto& v, auto&) {
         c.metrics.grid_ny = static_cast<int>(to_count(k, v));
         if (c.metrics.grid_ny < 1) throw ConfigError(k + ": must be at least 1");
       }},
  };
  return table;
}

}  // namespace

const RegionOfInterest& RunConfig::require_region() const {
  if (!region) throw ConfigError("region: required (x_min,y_min,x_max,y_max)");
  return *region;
}

std::filesystem::path RunConfig::model_path() const {
  if (!model.empty()) return model;
  if (!output_dir.empty()) return output_dir / "model.ckpt";
  throw ConfigError("model: required (or output_dir to use <output_dir>/model.ckpt)");
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (cfg.entries.count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    it->second(cfg, key, value, base_dir);
    cfg.entries.emplace(key, value);
  }
  cfg.train.seed = cfg.seed;
  cfg.sim.seed = cfg.seed;
  try {
    cfg.sim.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("sim: ") + e.what());
  }
  std::string canonical;
  for (const auto& [k, v] : cfg.entries) canonical += k + "=" + v + "\n";
  cfg.hash = fnv1a_hex(canonical);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_run_config(in, path.parent_path());
}

}  // namespace crowdforge::app
