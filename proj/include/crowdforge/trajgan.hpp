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

// Trajectory GAN: an entry head that emits the first two points, an LSTM
// continuation head that extends a trajectory one point at a time, and a
// discriminator with matching entry and continuation scores.
//
// Networks work in normalized coordinates: the region of interest, grown by
// a margin on every side, maps onto [-1, 1]^2.

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "crowdforge/core.hpp"
#include "crowdforge/nn/adam.hpp"
#include "crowdforge/nn/checkpoint.hpp"
#include "crowdforge/nn/layers.hpp"
#include "crowdforge/nn/tape.hpp"

namespace crowdforge::gan {

using nn::Tensor;
using nn::Var;

inline constexpr Eigen::Index kNoiseDim = 3;
inline constexpr std::size_t kHistory = 4;
inline constexpr Eigen::Index kLstmHidden = 62;
inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kLeakySlope = 0.1;

class Normalizer {
 public:
  explicit Normalizer(const RegionOfInterest& region, double margin = 0.1);

  Point2 normalize(const Point2& p) const;
  Point2 denormalize(const Point2& q) const;
  // World meters per normalized unit along x and y.
  Vec2 scale() const { return half_; }
  // The region itself in normalized coordinates.
  Point2 region_low() const { return normalize({region_.x_min(), region_.y_min()}); }
  Point2 region_high() const { return normalize({region_.x_max(), region_.y_max()}); }

  const RegionOfInterest& region() const { return region_; }
  double margin() const { return margin_; }

 private:
  RegionOfInterest region_;
  double margin_;
  Point2 center_;
  Vec2 half_;
};

struct GeneratorParams {
  nn::FCBlock entry_fc;   // 3 -> 128 -> 64 -> 32 -> 4, tanh output
  nn::LSTMCell cont_lstm;  // input 2, hidden 62
  nn::FCBlock cont_fc;    // 65 -> 64 -> 32 -> 2, linear output

  // All weights zero.
  static GeneratorParams make();
  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;
};

struct DiscriminatorParams {
  nn::FCBlock entry_fc;   // 4 -> 128 -> 64 -> 32 -> 1, sigmoid output
  nn::LSTMCell cont_lstm;  // input 2, hidden 62
  nn::FCBlock cont_fc;    // 64 -> 64 -> 32 -> 1, sigmoid output

  static DiscriminatorParams make();
  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;
};

void init_uniform(GeneratorParams& g, std::mt19937_64& rng);
void init_uniform(DiscriminatorParams& d, std::mt19937_64& rng);

// Columns of uniform noise on [-1, 1]^3, drawn column by column.
Tensor sample_noise(std::mt19937_64& rng, Eigen::Index cols);

// ---- Single-sample inference -------------------------------------------

std::pair<Point2, Point2> gen_entry(const GeneratorParams& g, const Normalizer& norm,
                                    const Eigen::VectorXd& z);
// Uses the last kHistory points of history. Throws ContractError for fewer
// than two points or a noise vector of the wrong size.
Point2 gen_next(const GeneratorParams& g, const Normalizer& norm, std::span<const Point2> history,
                const Eigen::VectorXd& z);
// Entry pair, then continuation with fresh noise per step until a point
// leaves the region (kept as the last point) or n_max points exist. p0 is
// clamped into the region; a p1 outside the region ends the trajectory.
Trajectory gen_trajectory(const GeneratorParams& g, const Normalizer& norm, std::mt19937_64& rng,
                          std::size_t n_max, double dt);

double disc_entry(const DiscriminatorParams& d, const Normalizer& norm, const Point2& p0,
                  const Point2& p1);
double disc_next(const DiscriminatorParams& d, const Normalizer& norm,
                 std::span<const Point2> history, const Point2& candidate);
// n - 1 values: the entry score, then one continuation score per later point.
std::vector<double> disc_trajectory(const DiscriminatorParams& d, const Normalizer& norm,
                                    const Trajectory& traj);

// ---- Batched graph construction ------------------------------------------

// A batch stored step by step: steps[k] holds point k (normalized) of every
// trajectory longer than k, with members[k] listing their batch indices in
// increasing order.
struct StepBatch {
  std::size_t batch = 0;
  std::vector<std::vector<Eigen::Index>> members;
  std::vector<Tensor> steps;  // [2 x members[k].size()]
};

struct StepVars {
  std::size_t batch = 0;
  std::vector<std::vector<Eigen::Index>> members;
  std::vector<Var> steps;
};

StepBatch make_step_batch(std::span<const Trajectory> trajs, const Normalizer& norm);
std::vector<Trajectory> to_trajectories(const StepBatch& batch, const Normalizer& norm, double dt);
StepVars bind_batch(nn::Tape& tape, const StepBatch& batch);
StepBatch batch_values(const nn::Tape& tape, const StepVars& vars);

// What the discriminator looks at: the entry pairs [4 x B] and every
// continuation window, grouped by history length 2, 3 and 4.
struct Windows {
  Tensor entry;
  std::array<std::vector<Tensor>, 3> history;  // group g has g + 2 steps
  std::array<Tensor, 3> candidate;
};

struct WindowVars {
  Var entry;
  std::array<std::vector<Var>, 3> history;
  std::array<Var, 3> candidate;
  std::array<Eigen::Index, 3> count{};
};

WindowVars make_windows(nn::Tape& tape, const StepVars& batch);
Windows window_values(const nn::Tape& tape, const WindowVars& w);
WindowVars bind_windows(nn::Tape& tape, const Windows& w);

class GeneratorGraph {
 public:
  GeneratorGraph(nn::Tape& tape, const GeneratorParams& g, bool trainable);
  // Normalized p0 and p1 ([2 x cols] each) from noise [3 x cols].
  std::pair<Var, Var> entry(Var noise) const;
  // Normalized next point from up to kHistory steps of history.
  Var next(std::span<const Var> history, Var noise) const;

 private:
  nn::Tape* tape_;
  nn::BoundFC entry_;
  nn::BoundLSTM lstm_;
  nn::BoundFC cont_;
};

class DiscriminatorGraph {
 public:
  DiscriminatorGraph(nn::Tape& tape, const DiscriminatorParams& d, bool trainable);
  // Clamped probabilities [1 x cols].
  Var entry(Var pairs) const;
  Var next(std::span<const Var> history, Var candidate) const;

 private:
  nn::Tape* tape_;
  nn::BoundFC entry_;
  nn::BoundLSTM lstm_;
  nn::BoundFC cont_;
};

// Generates `batch` trajectories on the tape, drawing entry noise [3 x batch]
// first and then [3 x active] per continuation step.
StepVars generate_batch(nn::Tape& tape, const GeneratorGraph& g, const Normalizer& norm,
                        std::mt19937_64& rng, std::size_t batch, std::size_t n_max);

struct DiscTerms {
  Var entry;
  Var continuation;
};

// Sum of log v (real) or log(1 - v) (fake) over entries and continuation
// windows.
DiscTerms disc_terms(nn::Tape& tape, const DiscriminatorGraph& d, const WindowVars& w, bool real);

// Sum over the length-5 windows of the real batch of the world-space
// distance between the fifth point and its prediction from the first four.
// noise is [3 x number of windows].
Var l2_term(nn::Tape& tape, const GeneratorGraph& g, const Normalizer& norm, const WindowVars& real,
            Var noise);

struct GanLoss {
  double entry = 0.0;         // sum of log v_e (real) + log(1 - v_e) (fake)
  double continuation = 0.0;  // same over continuation windows
  double l2 = 0.0;
};

// Evaluates all three loss components; window noise for the l2 term is drawn
// from rng.
GanLoss gan_loss(const DiscriminatorParams& d, const GeneratorParams& g, const Normalizer& norm,
                 std::span<const Trajectory> real, std::span<const Trajectory> fake,
                 std::mt19937_64& rng);

// One Adam step on the discriminator objective (ascent). Returns the entry
// and continuation terms before the update.
std::pair<double, double> discriminator_step(DiscriminatorParams& d, nn::AdamState& state,
                                             const Windows& real, const Windows& fake);

// Copy of d advanced by u discriminator steps on the given batch. Neither d
// nor state is modified.
DiscriminatorParams unroll_discriminator(const DiscriminatorParams& d, const nn::AdamState& state,
                                         const Windows& real, const Windows& fake, std::size_t u);

// ---- Training ------------------------------------------------------------

struct TrainConfig {
  std::size_t iterations = 50000;
  std::size_t unroll = 10;  // 0 trains a plain GAN
  std::size_t batch_size = 0;  // 0 picks min(N, 64)
  double l2_weight = 1.0;
  std::uint64_t seed = 0;
  std::size_t d_steps = 1;
  std::size_t n_max = 40;
  double margin = 0.1;
  nn::AdamConfig adam;
};

struct LossRecord {
  std::size_t iteration = 0;
  double entry = 0.0;
  double continuation = 0.0;
  double l2 = 0.0;
};

struct TrainResult {
  GeneratorParams g;
  DiscriminatorParams d;
  std::vector<LossRecord> log;
};

using ProgressFn = std::function<void(const LossRecord&)>;

// Throws ContractError for an empty dataset.
TrainResult train(const Dataset& data, const TrainConfig& cfg, const ProgressFn& progress = {});

// ---- Model files -----------------------------------------------------------

struct GanModel {
  GeneratorParams g;
  DiscriminatorParams d;
  RegionOfInterest region;
  double margin = 0.1;
  double dt = 0.4;
  std::uint64_t seed = 0;
  std::size_t n_max = 40;

  Normalizer normalizer() const { return Normalizer(region, margin); }
};

nn::Checkpoint to_checkpoint(const GanModel& model);
// Throws ModelError when the architecture or a tensor shape does not match.
GanModel from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace crowdforge::gan
