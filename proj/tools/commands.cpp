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

#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "crowdforge/errors.hpp"
#include "crowdforge/ingest.hpp"
#include "crowdforge/nn/checkpoint.hpp"

#ifndef CROWDFORGE_VERSION
#define CROWDFORGE_VERSION "0.0.0"
#endif

namespace crowdforge::app {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

const char* tool_version() { return CROWDFORGE_VERSION; }

namespace {

ordered_json manifest_base(const RunConfig& cfg, const char* command) {
  ordered_json m;
  m["tool"] = "crowdforge";
  m["version"] = tool_version();
  m["command"] = command;
  m["config_hash"] = cfg.hash;
  m["seed"] = cfg.seed;
  m["config"] = cfg.entries;
  return m;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

fs::path manifest_for(const fs::path& file) {
  fs::path m = file;
  m += ".manifest.json";
  return m;
}

struct LoadedTracks {
  ingest::TrackFile file;
  std::vector<Trajectory> trajectories;
};

LoadedTracks load_tracks(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("trajectory file not found: " + path.string());
  LoadedTracks out{ingest::load_trajectory_file(path.string()), {}};
  for (const auto& track : out.file.tracks) {
    out.trajectories.push_back(ingest::resample(track, out.file.dt));
  }
  return out;
}

gan::GanModel load_model(const fs::path& path) {
  if (!fs::exists(path)) throw ModelError("model checkpoint not found: " + path.string());
  try {
    return gan::from_checkpoint(nn::load_checkpoint(path.string()));
  } catch (const ModelError&) {
    throw;
  } catch (const Error& e) {
    throw ModelError(std::string("unreadable checkpoint: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const RegionOfInterest& region = cfg.require_region();
  if (cfg.dataset.empty()) throw ConfigError("dataset: required for train");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir: required for train");
  const fs::path model_path = cfg.model_path();

  const auto tracks = load_tracks(cfg.dataset);
  const auto clipped = ingest::clip_and_filter_roi(tracks.trajectories, region);
  log << "train: " << tracks.file.tracks.size() << " tracks, " << clipped.dataset.size()
      << " enter and exit the region, " << clipped.dropped << " dropped\n";
  if (!tracks.file.single_sample_ids.empty()) {
    log << "train: skipped " << tracks.file.single_sample_ids.size() << " single-sample ids\n";
  }
  if (clipped.dataset.empty()) throw DataError("no trajectory enters and exits the region");

  const auto start = std::chrono::steady_clock::now();
  const auto result = gan::train(clipped.dataset, cfg.train, [&](const gan::LossRecord& r) {
    if (cfg.log_every > 0 && (r.iteration + 1) % cfg.log_every == 0) {
      log << "train: iteration " << r.iteration + 1 << " entry=" << r.entry
          << " continuation=" << r.continuation << " l2=" << r.l2 << "\n";
    }
  });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ensure_dir(cfg.output_dir);
  gan::GanModel model{result.g, result.d, region, cfg.train.margin, clipped.dataset.dt, cfg.seed,
                      cfg.train.n_max};
  ensure_dir(model_path.parent_path());
  nn::save_checkpoint(model_path.string(), gan::to_checkpoint(model));

  auto csv = open_out(cfg.output_dir / "train_loss.csv");
  csv << "iteration,entry,continuation,l2\n";
  for (const auto& r : result.log) {
    csv << r.iteration << "," << fmt(r.entry) << "," << fmt(r.continuation) << "," << fmt(r.l2)
        << "\n";
  }

  auto m = manifest_base(cfg, "train");
  m["dataset"] = cfg.dataset.string();
  m["trajectories"] = clipped.dataset.size();
  m["dropped"] = clipped.dropped;
  m["dt"] = clipped.dataset.dt;
  m["iterations"] = cfg.train.iterations;
  m["unroll"] = cfg.train.unroll;
  m["model"] = model_path.string();
  m["loss_csv"] = "train_loss.csv";
  m["seconds"] = seconds;
  write_json(cfg.output_dir / "manifest.json", m);
  log << "train: wrote " << model_path.string() << "\n";
}

void cmd_generate(const RunConfig& cfg, std::size_t count, const fs::path& out, std::ostream& log) {
  const auto model = load_model(cfg.model_path());
  const std::size_t n_max = cfg.generate_n_max > 0 ? cfg.generate_n_max : model.n_max;
  const auto norm = model.normalizer();

  std::mt19937_64 seeds = make_stream(cfg.seed, RngStream::kGenerate);
  std::vector<Trajectory> trajs;
  std::vector<std::uint64_t> per_seed;
  trajs.reserve(count);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < count; ++i) {
    per_seed.push_back(seeds());
    std::mt19937_64 rng(per_seed.back());
    trajs.push_back(gan::gen_trajectory(model.g, norm, rng, n_max, model.dt));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double ms_per = count > 0 ? 1000.0 * seconds / static_cast<double>(count) : 0.0;

  auto file = open_out(out);
  ingest::write_trajectory_file(file, model.dt, trajs);
  file.close();

  auto m = manifest_base(cfg, "generate");
  m["model"] = cfg.model_path().string();
  m["count"] = count;
  m["n_max"] = n_max;
  m["dt"] = model.dt;
  m["mean_generation_ms"] = ms_per;
  m["trajectory_seeds"] = per_seed;
  write_json(manifest_for(out), m);
  log << "generate: " << count << " trajectories, " << std::setprecision(4) << ms_per
      << " ms per trajectory\n";
}

void cmd_simulate(const RunConfig& cfg, const fs::path& trajs, const fs::path& out,
                  std::ostream& log) {
  const auto input = load_tracks(trajs);
  const auto result = sim::run_simulation(input.trajectories, cfg.sim);

  auto file = open_out(out);
  ingest::write_trajectory_file(file, result.dt, result.trajectories, result.start_frames);
  file.close();

  const auto& s = result.stats;
  auto m = manifest_base(cfg, "simulate");
  m["input"] = trajs.string();
  m["input_trajectories"] = input.trajectories.size();
  m["inserted"] = s.inserted;
  m["removed"] = s.removed;
  m["timeouts"] = s.timeouts;
  m["cycled"] = s.cycled;
  m["too_short"] = s.too_short;
  m["coincident_pairs"] = s.coincident_pairs;
  m["frames"] = s.frames;
  m["output_trajectories"] = result.trajectories.size();
  write_json(manifest_for(out), m);
  log << "simulate: inserted " << s.inserted << ", removed " << s.removed << ", timeouts "
      << s.timeouts << " over " << s.frames << " frames\n";
}

namespace {

void write_boundary_csv(const fs::path& path, const metrics::BoundaryDensity& d) {
  auto out = open_out(path);
  out << "arclength,density\n";
  for (std::size_t i = 0; i < d.positions.size(); ++i) {
    out << fmt(d.positions[i]) << "," << fmt(d.density[i]) << "\n";
  }
}

void write_histogram_csv(const fs::path& path, const metrics::Histogram& h) {
  auto out = open_out(path);
  out << "bin_start,mass\n";
  for (std::size_t k = 0; k < h.mass.size(); ++k) {
    out << fmt(static_cast<double>(k) * h.bin_width) << "," << fmt(h.mass[k]) << "\n";
  }
}

}  // namespace

void cmd_evaluate(const RunConfig& cfg, const fs::path& a, const fs::path& b, const fs::path& out_dir,
                  std::ostream& log) {
  const RegionOfInterest& region = cfg.require_region();
  const auto& mc = cfg.metrics;
  const auto ta = load_tracks(a);
  const auto tb = load_tracks(b);
  if (ta.trajectories.empty()) throw DataError("no trajectories in " + a.string());
  if (tb.trajectories.empty()) throw DataError("no trajectories in " + b.string());
  ensure_dir(out_dir);

  auto report = manifest_base(cfg, "evaluate");
  report["a"] = {{"path", a.string()}, {"trajectories", ta.trajectories.size()}};
  report["b"] = {{"path", b.string()}, {"trajectories", tb.trajectories.size()}};

  const Dataset da{ta.trajectories, region, ta.file.dt};
  const Dataset db{tb.trajectories, region, tb.file.dt};
  const auto ha = metrics::heatmap(da, mc.grid_nx, mc.grid_ny, mc.kde_bandwidth);
  const auto hb = metrics::heatmap(db, mc.grid_nx, mc.grid_ny, mc.kde_bandwidth);
  {
    auto f = open_out(out_dir / "heatmap_a.csv");
    metrics::write_density_csv(f, ha);
    auto g = open_out(out_dir / "heatmap_b.csv");
    metrics::write_density_csv(g, hb);
  }
  report["heatmap"] = {{"bandwidth", mc.kde_bandwidth}, {"nx", mc.grid_nx}, {"ny", mc.grid_ny},
                       {"mass_a", ha.mass()},       {"mass_b", hb.mass()},
                       {"files", {"heatmap_a.csv", "heatmap_b.csv"}}};

  std::vector<Point2> ea;
  std::vector<Point2> eb;
  for (const auto& t : ta.trajectories) ea.push_back(t[0]);
  for (const auto& t : tb.trajectories) eb.push_back(t[0]);
  write_boundary_csv(out_dir / "entry_density_a.csv",
                     metrics::entry_boundary_density(ea, region, mc.boundary_bandwidth));
  write_boundary_csv(out_dir / "entry_density_b.csv",
                     metrics::entry_boundary_density(eb, region, mc.boundary_bandwidth));
  report["entry_density"] = {{"bandwidth", mc.boundary_bandwidth},
                             {"samples", metrics::kBoundarySamples},
                             {"files", {"entry_density_a.csv", "entry_density_b.csv"}}};

  ordered_json ipd = {{"bin_width", mc.ipd_bin_width}};
  const std::pair<const LoadedTracks*, const char*> sides[] = {{&ta, "a"}, {&tb, "b"}};
  for (const auto& [side, name] : sides) {
    const auto frames = ingest::frames_from_tracks(side->file);
    const std::string file = std::string("ipd_") + name + ".csv";
    try {
      const auto h = metrics::ipd_histogram(frames, mc.ipd_bin_width);
      write_histogram_csv(out_dir / file, h);
      ipd[name] = {{"file", file}, {"pairs", h.pair_count}};
    } catch (const ContractError&) {
      ipd[name] = nullptr;
      log << "evaluate: " << name << " has no frame with two agents; IPD skipped\n";
    }
  }
  report["ipd"] = ipd;

  // EMD needs equal sizes: subsample the larger side.
  const std::size_t n = std::min(ea.size(), eb.size());
  auto pick_a = metrics::subsample_indices(ea.size(), n, cfg.seed);
  auto pick_b = metrics::subsample_indices(eb.size(), n, cfg.seed);
  ordered_json sub = {{"n", n}, {"a_from", ea.size()}, {"b_from", eb.size()}, {"seed", cfg.seed}};
  if (ea.size() != eb.size()) {
    log << "evaluate: subsampled " << (ea.size() > eb.size() ? "a" : "b") << " from "
        << std::max(ea.size(), eb.size()) << " to " << n << " for EMD\n";
  }
  std::vector<Point2> sa;
  std::vector<Point2> sb;
  std::vector<Trajectory> xa;
  std::vector<Trajectory> xb;
  for (auto i : pick_a) {
    sa.push_back(ea[i]);
    xa.push_back(ta.trajectories[i]);
  }
  for (auto i : pick_b) {
    sb.push_back(eb[i]);
    xb.push_back(tb.trajectories[i]);
  }
  const auto euclid = [](const Point2& p, const Point2& q) { return distance(p, q); };
  const double emd_entry = metrics::emd(metrics::ground_matrix<Point2>(sa, sb, euclid)).value;
  const double w = mc.dtw_length_weight;
  const auto dtw = [w](const Trajectory& p, const Trajectory& q) { return metrics::dtw_distance(p, q, w); };
  const double emd_traj = metrics::emd(metrics::ground_matrix<Trajectory>(xa, xb, dtw)).value;
  report["emd_entry"] = {{"ground", "euclidean"}, {"value", emd_entry}, {"subsample", sub}};
  report["emd_trajectory"] = {
      {"ground", "dtw"}, {"length_weight", w}, {"value", emd_traj}, {"subsample", sub}};

  write_json(out_dir / "report.json", report);
  auto m = manifest_base(cfg, "evaluate");
  m["files"] = {"report.json",         "heatmap_a.csv", "heatmap_b.csv", "entry_density_a.csv",
                "entry_density_b.csv", "ipd_a.csv",     "ipd_b.csv"};
  write_json(out_dir / "manifest.json", m);
  log << "evaluate: entry EMD " << emd_entry << ", trajectory EMD " << emd_traj << "\n";
}

int run(int argc, const char* const* argv, std::ostream& log) {
  CLI::App app{"Crowd trajectory GAN, simulation and evaluation", "crowdforge"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  std::string config;
  std::size_t count = 0;
  std::string out;
  std::string trajs;
  std::string in_a;
  std::string in_b;

  auto* train = app.add_subcommand("train", "Train the trajectory GAN");
  train->add_option("--config", config, "Run configuration")->required();
  auto* generate = app.add_subcommand("generate", "Sample trajectories from a trained model");
  generate->add_option("--config", config, "Run configuration")->required();
  generate->add_option("--count", count, "Number of trajectories")->required();
  generate->add_option("--out", out, "Output trajectory file")->required();
  auto* simulate = app.add_subcommand("simulate", "Run the agent simulation");
  simulate->add_option("--config", config, "Run configuration")->required();
  simulate->add_option("--trajs", trajs, "Trajectories assigned to arriving agents")->required();
  simulate->add_option("--out", out, "Realized trajectory file")->required();
  auto* evaluate = app.add_subcommand("evaluate", "Compare two crowds");
  evaluate->add_option("--config", config, "Run configuration")->required();
  evaluate->add_option("--a", in_a, "First trajectory file")->required();
  evaluate->add_option("--b", in_b, "Second trajectory file")->required();
  evaluate->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    const RunConfig cfg = load_run_config(config);
    if (train->parsed()) cmd_train(cfg, log);
    if (generate->parsed()) cmd_generate(cfg, count, out, log);
    if (simulate->parsed()) cmd_simulate(cfg, trajs, out, log);
    if (evaluate->parsed()) cmd_evaluate(cfg, in_a, in_b, out, log);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ModelError& e) {
    log << "model error: " << e.what() << "\n";
    return kModelError;
  } catch (const Error& e) {
    log << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace crowdforge::app
