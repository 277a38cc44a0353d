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

#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "crowdforge/errors.hpp"
#include "crowdforge/ingest.hpp"
#include "crowdforge/nn/checkpoint.hpp"
#include "run_config.hpp"

namespace crowdforge::app {
namespace {
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("crowdforge_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "crowdforge");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    log_.str("");
    return run(static_cast<int>(argv.size()), argv.data(), log_);
  }

  // Tracks that walk through the 10 x 5 region from outside to outside.
  void write_tracks(const fs::path& p, int count) {
    std::ostringstream s;
    s << "# dt=0.4\n";
    for (int i = 0; i < count; ++i) {
      const double y = 0.5 + 4.0 * i / count;
      for (int f = 0; f < 30; ++f) s << i << " " << f << " " << -1.0 + 0.48 * f << " " << y << "\n";
    }
    spit(p, s.str());
  }

  fs::path config(const std::string& body) {
    const fs::path p = dir_ / "run.cfg";
    spit(p, body);
    return p;
  }

  fs::path dir_;
  std::ostringstream log_;
};

TEST(RunConfigTest, ParsesKeysAndResolvesPaths) {
  std::istringstream in(
      "# comment\n\nregion = 0,0,10,5\nseed=42\ndataset=data/tracks.txt\n"
      "model=/abs/model.ckpt\ntrain.iterations=7\nsim.frame_dt=0.1\n");
  const auto cfg = parse_run_config(in, "/base");
  EXPECT_EQ(cfg.require_region(), RegionOfInterest(0, 0, 10, 5));
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.train.seed, 42u);
  EXPECT_EQ(cfg.dataset, fs::path("/base/data/tracks.txt"));
  EXPECT_EQ(cfg.model, fs::path("/abs/model.ckpt"));
  EXPECT_EQ(cfg.train.iterations, 7u);
  EXPECT_EQ(cfg.hash.size(), 16u);
}

TEST(RunConfigTest, HashIgnoresOrderAndComments) {
  std::istringstream a("seed=1\nregion=0,0,1,1\n");
  std::istringstream b("# x\nregion=0,0,1,1\n seed = 1\n");
  std::istringstream c("seed=2\nregion=0,0,1,1\n");
  EXPECT_EQ(parse_run_config(a, ".").hash, parse_run_config(b, ".").hash);
  std::istringstream a2("seed=1\nregion=0,0,1,1\n");
  EXPECT_NE(parse_run_config(a2, ".").hash, parse_run_config(c, ".").hash);
}

TEST(RunConfigTest, RejectsBadInput) {
  for (const char* text : {"bogus=1\n", "seed\n", "seed=-1\n", "seed=1\nseed=2\n", "region=0,0,1\n",
                           "region=1,0,0,1\n", "train.batch_size=0\n", "sim.frame_dt=abc\n",
                           "sim.output_dt=0.35\n", "train.n_max=1\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_run_config(in, "."), ConfigError) << text;
  }
  std::istringstream none("seed=1\n");
  EXPECT_THROW(parse_run_config(none, ".").require_region(), ConfigError);
}

TEST(RunConfigTest, FnvKnownValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST_F(CliTest, UsageAndConfigErrors) {
  EXPECT_EQ(cli({}), kConfigError);
  EXPECT_EQ(cli({"train"}), kConfigError);
  EXPECT_EQ(cli({"train", "--config", (dir_ / "missing.cfg").string()}), kConfigError);
  EXPECT_EQ(cli({"train", "--config", config("region=0,0,10,5\nwhat=1\n").string()}), kConfigError);
  EXPECT_EQ(cli({"train", "--config", config("output_dir=out\ndataset=d.txt\n").string()}),
            kConfigError);
}

TEST_F(CliTest, TrainWritesReloadableDeterministicOutputs) {
  write_tracks(dir_ / "tracks.txt", 6);
  const std::string body =
      "dataset=tracks.txt\nregion=0,0,10,5\nseed=3\ntrain.iterations=10\ntrain.unroll=2\n"
      "train.batch_size=4\ntrain.n_max=8\n";
  const auto cfg1 = config(body + "output_dir=out1\n");
  ASSERT_EQ(cli({"train", "--config", cfg1.string()}), kOk) << log_.str();
  const auto cfg2 = config(body + "output_dir=out2\n");
  ASSERT_EQ(cli({"train", "--config", cfg2.string()}), kOk) << log_.str();

  const std::string csv = slurp(dir_ / "out1" / "train_loss.csv");
  EXPECT_EQ(csv, slurp(dir_ / "out2" / "train_loss.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
  EXPECT_EQ(slurp(dir_ / "out1" / "model.ckpt"), slurp(dir_ / "out2" / "model.ckpt"));

  // Reload and write again: byte-identical checkpoint.
  const auto ckpt = nn::load_checkpoint((dir_ / "out1" / "model.ckpt").string());
  std::ostringstream again;
  nn::write_checkpoint(again, gan::to_checkpoint(gan::from_checkpoint(ckpt)));
  EXPECT_EQ(again.str(), slurp(dir_ / "out1" / "model.ckpt"));

  const auto m = nlohmann::json::parse(slurp(dir_ / "out1" / "manifest.json"));
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["version"], tool_version());
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(m["trajectories"], 6);
}

TEST_F(CliTest, TrainMissingDatasetLeavesNoOutputs) {
  const auto cfg = config("dataset=nope.txt\nregion=0,0,10,5\noutput_dir=out\n");
  EXPECT_EQ(cli({"train", "--config", cfg.string()}), kDataError);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, TrainRejectsMalformedAndEmptyData) {
  spit(dir_ / "bad.txt", "# dt=0.4\n1 0 0 zero\n");
  EXPECT_EQ(cli({"train", "--config", config("dataset=bad.txt\nregion=0,0,10,5\noutput_dir=o\n").string()}),
            kDataError);
  spit(dir_ / "inside.txt", "# dt=0.4\n1 0 1 1\n1 1 2 1\n");
  EXPECT_EQ(cli({"train", "--config", config("dataset=inside.txt\nregion=0,0,10,5\noutput_dir=o\n").string()}),
            kDataError);
}

class CliModelTest : public CliTest {
 protected:
  void SetUp() override {
    CliTest::SetUp();
    write_tracks(dir_ / "tracks.txt", 4);
    base_ = "dataset=tracks.txt\nregion=0,0,10,5\nseed=5\ntrain.iterations=2\ntrain.unroll=1\n"
            "train.batch_size=2\ntrain.n_max=6\noutput_dir=out\n";
    ASSERT_EQ(cli({"train", "--config", config(base_).string()}), kOk) << log_.str();
  }
  std::string base_;
};

TEST_F(CliModelTest, GenerateCountsAndDeterminism) {
  const auto cfg = config(base_);
  ASSERT_EQ(cli({"generate", "--config", cfg.string(), "--count", "0", "--out", (dir_ / "g0.txt").string()}), kOk);
  const auto empty = ingest::load_trajectory_file((dir_ / "g0.txt").string());
  EXPECT_TRUE(empty.tracks.empty());
  EXPECT_EQ(empty.dt, 0.4);

  ASSERT_EQ(cli({"generate", "--config", cfg.string(), "--count", "352", "--out", (dir_ / "g.txt").string()}), kOk);
  const auto file = ingest::load_trajectory_file((dir_ / "g.txt").string());
  std::set<std::string> ids;
  for (const auto& t : file.tracks) ids.insert(t.id);
  EXPECT_EQ(ids.size() + file.single_sample_ids.size(), 352u);
  EXPECT_TRUE(file.single_sample_ids.empty());
  const auto m = nlohmann::json::parse(slurp(dir_ / "g.txt.manifest.json"));
  EXPECT_EQ(m["trajectory_seeds"].size(), 352u);
  EXPECT_GE(m["mean_generation_ms"].get<double>(), 0.0);

  ASSERT_EQ(cli({"generate", "--config", cfg.string(), "--count", "352", "--out", (dir_ / "h.txt").string()}), kOk);
  EXPECT_EQ(slurp(dir_ / "g.txt"), slurp(dir_ / "h.txt"));
}

TEST_F(CliModelTest, GenerateModelErrors) {
  const fs::path ckpt = dir_ / "out" / "model.ckpt";
  std::string text = slurp(ckpt);
  const auto pos = text.find("generator.cont_lstm");
  ASSERT_NE(pos, std::string::npos);
  spit(dir_ / "bad.ckpt", text.replace(text.find('\n', pos) - 2, 2, "63"));
  const auto cfg = config(base_ + "model=bad.ckpt\n");
  EXPECT_EQ(cli({"generate", "--config", cfg.string(), "--count", "1", "--out", (dir_ / "g.txt").string()}),
            kModelError);
  spit(dir_ / "junk.ckpt", "not a model\n");
  EXPECT_EQ(cli({"generate", "--config", config(base_ + "model=junk.ckpt\n").string(), "--count", "1",
                 "--out", (dir_ / "g.txt").string()}),
            kModelError);
  EXPECT_EQ(cli({"generate", "--config", config(base_ + "model=none.ckpt\n").string(), "--count", "1",
                 "--out", (dir_ / "g.txt").string()}),
            kModelError);
}

TEST_F(CliTest, SimulateDurationZeroAndDeterminism) {
  write_tracks(dir_ / "tracks.txt", 3);
  const auto zero = config("seed=1\nsim.duration=0\n");
  ASSERT_EQ(cli({"simulate", "--config", zero.string(), "--trajs", (dir_ / "tracks.txt").string(), "--out",
                 (dir_ / "s0.txt").string()}),
            kOk) << log_.str();
  EXPECT_TRUE(ingest::load_trajectory_file((dir_ / "s0.txt").string()).tracks.empty());

  const auto cfg = config("seed=1\nsim.duration=12\nsim.arrival_mean=1.5\n");
  for (const char* out : {"s1.txt", "s2.txt"}) {
    ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--trajs", (dir_ / "tracks.txt").string(), "--out",
                   (dir_ / out).string()}),
              kOk);
  }
  EXPECT_EQ(slurp(dir_ / "s1.txt"), slurp(dir_ / "s2.txt"));
  const auto m = nlohmann::json::parse(slurp(dir_ / "s1.txt.manifest.json"));
  EXPECT_EQ(m["inserted"], m["removed"]);
  EXPECT_GT(m["inserted"].get<int>(), 0);
}

TEST_F(CliTest, SimulateInsertsExactlyTheScheduledAgents) {
  write_tracks(dir_ / "tracks.txt", 1);
  for (double mean : {1e6, 3.0}) {
    std::ostringstream body;
    body << "seed=9\nsim.duration=20\nsim.arrival_mean=" << mean << "\n";
    ASSERT_EQ(cli({"simulate", "--config", config(body.str()).string(), "--trajs",
                   (dir_ / "tracks.txt").string(), "--out", (dir_ / "s.txt").string()}),
              kOk);
    auto rng = make_stream(9, RngStream::kArrivals);
    const auto expected = sim::schedule_arrivals(mean, 20.0, rng).size();
    EXPECT_EQ(ingest::load_trajectory_file((dir_ / "s.txt").string()).tracks.size(), expected);
  }
}

TEST_F(CliTest, SimulateParseError) {
  spit(dir_ / "bad.txt", "1 0 0 0\n");
  EXPECT_EQ(cli({"simulate", "--config", config("seed=1\n").string(), "--trajs", (dir_ / "bad.txt").string(),
                 "--out", (dir_ / "s.txt").string()}),
            kDataError);
}

TEST_F(CliTest, EvaluateSelfComparison) {
  write_tracks(dir_ / "a.txt", 8);
  const auto cfg = config("seed=2\nregion=0,0,10,5\nmetrics.grid_nx=20\nmetrics.grid_ny=10\n");
  ASSERT_EQ(cli({"evaluate", "--config", cfg.string(), "--a", (dir_ / "a.txt").string(), "--b",
                 (dir_ / "a.txt").string(), "--out", (dir_ / "ev").string()}),
            kOk) << log_.str();
  const auto r = nlohmann::json::parse(slurp(dir_ / "ev" / "report.json"));
  EXPECT_EQ(r["emd_entry"]["value"], 0.0);
  EXPECT_EQ(r["emd_trajectory"]["value"], 0.0);
  EXPECT_EQ(slurp(dir_ / "ev" / "heatmap_a.csv"), slurp(dir_ / "ev" / "heatmap_b.csv"));
  for (const char* key : {"heatmap", "entry_density", "ipd", "emd_entry", "emd_trajectory"}) {
    EXPECT_TRUE(r.contains(key)) << key;
  }
  EXPECT_TRUE(fs::exists(dir_ / "ev" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir_ / "ev" / "ipd_a.csv"));
}

TEST_F(CliTest, EvaluateSubsamplesAndLogs) {
  write_tracks(dir_ / "a.txt", 8);
  write_tracks(dir_ / "b.txt", 5);
  const auto cfg = config("seed=2\nregion=0,0,10,5\nmetrics.grid_nx=20\nmetrics.grid_ny=10\n");
  ASSERT_EQ(cli({"evaluate", "--config", cfg.string(), "--a", (dir_ / "a.txt").string(), "--b",
                 (dir_ / "b.txt").string(), "--out", (dir_ / "ev").string()}),
            kOk);
  EXPECT_NE(log_.str().find("subsampled a from 8 to 5"), std::string::npos) << log_.str();
  const auto r = nlohmann::json::parse(slurp(dir_ / "ev" / "report.json"));
  EXPECT_EQ(r["emd_entry"]["subsample"]["n"], 5);
  EXPECT_EQ(r["emd_entry"]["subsample"]["a_from"], 8);
}

TEST_F(CliTest, EvaluateEmptyInputIsDataError) {
  write_tracks(dir_ / "a.txt", 2);
  spit(dir_ / "empty.txt", "# dt=0.4\n");
  const auto cfg = config("region=0,0,10,5\n");
  EXPECT_EQ(cli({"evaluate", "--config", cfg.string(), "--a", (dir_ / "a.txt").string(), "--b",
                 (dir_ / "empty.txt").string(), "--out", (dir_ / "ev").string()}),
            kDataError);
}

}  // namespace
}  // namespace crowdforge::app
