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

#include "crowdforge/trajgan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crowdforge/errors.hpp"

namespace crowdforge::gan {
namespace {

using nn::Activation;
using nn::Tape;

Tensor column(const Point2& p) {
  Tensor t(2, 1);
  t << p.x, p.y;
  return t;
}

Point2 point_at(const Tensor& t, Eigen::Index col) { return {t(0, col), t(1, col)}; }

// Position of every element of sub inside super; both sorted, sub a subset.
std::vector<Eigen::Index> positions(const std::vector<Eigen::Index>& sub,
                                    const std::vector<Eigen::Index>& super) {
  std::vector<Eigen::Index> out;
  out.reserve(sub.size());
  std::size_t j = 0;
  for (Eigen::Index b : sub) {
    while (j < super.size() && super[j] < b) ++j;
    if (j == super.size() || super[j] != b) throw ContractError("batch members are not nested");
    out.push_back(static_cast<Eigen::Index>(j));
  }
  return out;
}

// Column subset of step s restricted to the given members.
Var select(Tape& tape, const StepVars& batch, std::size_t s, const std::vector<Eigen::Index>& who) {
  if (batch.members[s] == who) return batch.steps[s];
  const auto pos = positions(who, batch.members[s]);
  return tape.gather_cols(batch.steps[s], pos);
}

Var zero_scalar(Tape& tape) { return tape.constant(Tensor::Zero(1, 1)); }

std::vector<Var> last_history(std::span<const Var> history) {
  const std::size_t n = std::min(history.size(), kHistory);
  return {history.end() - static_cast<std::ptrdiff_t>(n), history.end()};
}

std::vector<Point2> last_points(std::span<const Point2> history) {
  const std::size_t n = std::min(history.size(), kHistory);
  return {history.end() - static_cast<std::ptrdiff_t>(n), history.end()};
}

template <typename Params>
std::vector<nn::Parameter*> collect(Params& p) {
  std::vector<nn::Parameter*> out;
  for (auto* q : p.entry_fc.parameters()) out.push_back(q);
  for (auto* q : p.cont_lstm.parameters()) out.push_back(q);
  for (auto* q : p.cont_fc.parameters()) out.push_back(q);
  return out;
}

template <typename Params>
std::vector<const nn::Parameter*> collect_const(const Params& p) {
  std::vector<const nn::Parameter*> out;
  for (auto* q : p.entry_fc.parameters()) out.push_back(q);
  for (auto* q : p.cont_lstm.parameters()) out.push_back(q);
  for (auto* q : p.cont_fc.parameters()) out.push_back(q);
  return out;
}

}  // namespace

// ---- Normalizer ------------------------------------------------------------

Normalizer::Normalizer(const RegionOfInterest& region, double margin)
    : region_(region), margin_(margin), center_(region.center()) {
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw DomainError("normalizer margin must be >= 0");
  half_ = {0.5 * region.width() * (1.0 + margin), 0.5 * region.height() * (1.0 + margin)};
}

Point2 Normalizer::normalize(const Point2& p) const {
  return {(p.x - center_.x) / half_.x, (p.y - center_.y) / half_.y};
}

Point2 Normalizer::denormalize(const Point2& q) const {
  return {center_.x + q.x * half_.x, center_.y + q.y * half_.y};
}

// ---- Parameters ------------------------------------------------------------

GeneratorParams GeneratorParams::make() {
  const auto leaky = Activation::leaky_relu(kLeakySlope);
  return {nn::FCBlock::make("gen.entry_fc", {kNoiseDim, 128, 64, 32, 4}, leaky, Activation::tanh()),
          nn::LSTMCell::make("gen.cont_lstm", 2, kLstmHidden),
          nn::FCBlock::make("gen.cont_fc", {kLstmHidden + kNoiseDim, 64, 32, 2}, leaky,
                            Activation::linear())};
}

std::vector<nn::Parameter*> GeneratorParams::parameters() { return collect(*this); }
std::vector<const nn::Parameter*> GeneratorParams::parameters() const { return collect_const(*this); }

DiscriminatorParams DiscriminatorParams::make() {
  const auto leaky = Activation::leaky_relu(kLeakySlope);
  return {nn::FCBlock::make("disc.entry_fc", {4, 128, 64, 32, 1}, leaky, Activation::sigmoid()),
          nn::LSTMCell::make("disc.cont_lstm", 2, kLstmHidden),
          nn::FCBlock::make("disc.cont_fc", {kLstmHidden + 2, 64, 32, 1}, leaky,
                            Activation::sigmoid())};
}

std::vector<nn::Parameter*> DiscriminatorParams::parameters() { return collect(*this); }
std::vector<const nn::Parameter*> DiscriminatorParams::parameters() const {
  return collect_const(*this);
}

void init_uniform(GeneratorParams& g, std::mt19937_64& rng) {
  nn::init_uniform(g.entry_fc, rng);
  nn::init_uniform(g.cont_lstm, rng);
  nn::init_uniform(g.cont_fc, rng);
}

void init_uniform(DiscriminatorParams& d, std::mt19937_64& rng) {
  nn::init_uniform(d.entry_fc, rng);
  nn::init_uniform(d.cont_lstm, rng);
  nn::init_uniform(d.cont_fc, rng);
}

Tensor sample_noise(std::mt19937_64& rng, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor z(kNoiseDim, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < kNoiseDim; ++r) z(r, c) = u(rng);
  }
  return z;
}

// ---- Graph pieces ----------------------------------------------------------

GeneratorGraph::GeneratorGraph(Tape& tape, const GeneratorParams& g, bool trainable)
    : tape_(&tape),
      entry_(tape, g.entry_fc, trainable),
      lstm_(tape, g.cont_lstm, trainable),
      cont_(tape, g.cont_fc, trainable) {}

std::pair<Var, Var> GeneratorGraph::entry(Var noise) const {
  const Var out = entry_.forward(noise);
  return {tape_->slice_rows(out, 0, 2), tape_->slice_rows(out, 2, 2)};
}

Var GeneratorGraph::next(std::span<const Var> history, Var noise) const {
  if (history.size() < 2) throw ContractError("generator continuation needs >= 2 history points");
  const auto steps = last_history(history);
  nn::LSTMState state = lstm_.zero_state(tape_->value(steps.front()).cols());
  for (Var x : steps) state = lstm_.step(x, state);
  const std::array<Var, 2> parts = {state.h, noise};
  const Var delta = cont_.forward(tape_->concat_rows(parts));
  return tape_->add(steps.back(), delta);
}

DiscriminatorGraph::DiscriminatorGraph(Tape& tape, const DiscriminatorParams& d, bool trainable)
    : tape_(&tape),
      entry_(tape, d.entry_fc, trainable),
      lstm_(tape, d.cont_lstm, trainable),
      cont_(tape, d.cont_fc, trainable) {}

Var DiscriminatorGraph::entry(Var pairs) const {
  return tape_->clamp(entry_.forward(pairs), kProbabilityFloor, 1.0 - kProbabilityFloor);
}

Var DiscriminatorGraph::next(std::span<const Var> history, Var candidate) const {
  if (history.size() < 2) throw ContractError("discriminator continuation needs >= 2 history points");
  const auto steps = last_history(history);
  nn::LSTMState state = lstm_.zero_state(tape_->value(steps.front()).cols());
  for (Var x : steps) state = lstm_.step(x, state);
  const std::array<Var, 2> parts = {state.h, candidate};
  return tape_->clamp(cont_.forward(tape_->concat_rows(parts)), kProbabilityFloor,
                      1.0 - kProbabilityFloor);
}

// ---- Batches ---------------------------------------------------------------

StepBatch make_step_batch(std::span<const Trajectory> trajs, const Normalizer& norm) {
  StepBatch out;
  out.batch = trajs.size();
  std::size_t longest = 0;
  for (const auto& t : trajs) longest = std::max(longest, t.size());
  out.members.resize(longest);
  for (std::size_t k = 0; k < longest; ++k) {
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      if (trajs[i].size() > k) out.members[k].push_back(static_cast<Eigen::Index>(i));
    }
    Tensor step(2, static_cast<Eigen::Index>(out.members[k].size()));
    for (std::size_t j = 0; j < out.members[k].size(); ++j) {
      const Point2 q = norm.normalize(trajs[static_cast<std::size_t>(out.members[k][j])][k]);
      step(0, static_cast<Eigen::Index>(j)) = q.x;
      step(1, static_cast<Eigen::Index>(j)) = q.y;
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

std::vector<Trajectory> to_trajectories(const StepBatch& batch, const Normalizer& norm, double dt) {
  std::vector<std::vector<Point2>> pts(batch.batch);
  for (std::size_t k = 0; k < batch.steps.size(); ++k) {
    for (std::size_t j = 0; j < batch.members[k].size(); ++j) {
      pts[static_cast<std::size_t>(batch.members[k][j])].push_back(
          norm.denormalize(point_at(batch.steps[k], static_cast<Eigen::Index>(j))));
    }
  }
  std::vector<Trajectory> out;
  out.reserve(pts.size());
  for (auto& p : pts) out.emplace_back(std::move(p), dt);
  return out;
}

StepVars bind_batch(Tape& tape, const StepBatch& batch) {
  StepVars out{batch.batch, batch.members, {}};
  for (const auto& s : batch.steps) out.steps.push_back(tape.constant(s));
  return out;
}

StepBatch batch_values(const Tape& tape, const StepVars& vars) {
  StepBatch out{vars.batch, vars.members, {}};
  for (Var v : vars.steps) out.steps.push_back(tape.value(v));
  return out;
}

WindowVars make_windows(Tape& tape, const StepVars& batch) {
  if (batch.steps.size() < 2 || batch.members[1].size() != batch.batch) {
    throw ContractError("make_windows: every trajectory needs at least two points");
  }
  WindowVars w;
  const std::array<Var, 2> entry = {batch.steps[0], batch.steps[1]};
  w.entry = tape.concat_rows(entry);
  std::array<std::vector<std::vector<Var>>, 3> hist_parts;
  std::array<std::vector<Var>, 3> cand_parts;
  for (std::size_t g = 0; g < 3; ++g) hist_parts[g].resize(g + 2);
  for (std::size_t k = 2; k < batch.steps.size(); ++k) {
    const std::size_t len = std::min(k, kHistory);
    const std::size_t g = len - 2;
    for (std::size_t j = 0; j < len; ++j) {
      hist_parts[g][j].push_back(select(tape, batch, k - len + j, batch.members[k]));
    }
    cand_parts[g].push_back(batch.steps[k]);
    w.count[g] += static_cast<Eigen::Index>(batch.members[k].size());
  }
  for (std::size_t g = 0; g < 3; ++g) {
    if (cand_parts[g].empty()) continue;
    for (auto& parts : hist_parts[g]) w.history[g].push_back(tape.concat_cols(parts));
    w.candidate[g] = tape.concat_cols(cand_parts[g]);
  }
  return w;
}

Windows window_values(const Tape& tape, const WindowVars& w) {
  Windows out;
  out.entry = tape.value(w.entry);
  for (std::size_t g = 0; g < 3; ++g) {
    if (w.count[g] == 0) {
      out.candidate[g] = Tensor(2, 0);
      continue;
    }
    for (Var v : w.history[g]) out.history[g].push_back(tape.value(v));
    out.candidate[g] = tape.value(w.candidate[g]);
  }
  return out;
}

WindowVars bind_windows(Tape& tape, const Windows& w) {
  WindowVars out;
  out.entry = tape.constant(w.entry);
  for (std::size_t g = 0; g < 3; ++g) {
    out.count[g] = w.candidate[g].cols();
    if (out.count[g] == 0) continue;
    for (const auto& t : w.history[g]) out.history[g].push_back(tape.constant(t));
    out.candidate[g] = tape.constant(w.candidate[g]);
  }
  return out;
}

StepVars generate_batch(Tape& tape, const GeneratorGraph& g, const Normalizer& norm,
                        std::mt19937_64& rng, std::size_t batch, std::size_t n_max) {
  if (n_max < 2) throw ContractError("generate: n_max must be >= 2");
  if (batch == 0) throw ContractError("generate: empty batch");
  const auto b = static_cast<Eigen::Index>(batch);
  const Var noise = tape.constant(sample_noise(rng, b));
  // p0 stays unclamped here: a clamp would zero the gradient of any entry
  // that lands outside the region and pin it there.
  const auto [p0, p1] = g.entry(noise);

  StepVars out;
  out.batch = batch;
  std::vector<Eigen::Index> all(batch);
  for (std::size_t i = 0; i < batch; ++i) all[i] = static_cast<Eigen::Index>(i);
  out.members = {all, all};
  out.steps = {p0, p1};

  auto still_inside = [&](Var step, const std::vector<Eigen::Index>& who) {
    std::vector<Eigen::Index> keep;
    const Tensor& v = tape.value(step);
    for (std::size_t j = 0; j < who.size(); ++j) {
      if (norm.region().contains(norm.denormalize(point_at(v, static_cast<Eigen::Index>(j))))) {
        keep.push_back(who[j]);
      }
    }
    return keep;
  };

  std::vector<Eigen::Index> active = still_inside(p1, all);
  for (std::size_t k = 2; k < n_max && !active.empty(); ++k) {
    const std::size_t len = std::min(k, kHistory);
    std::vector<Var> history;
    for (std::size_t j = 0; j < len; ++j) history.push_back(select(tape, out, k - len + j, active));
    const Var z = tape.constant(sample_noise(rng, static_cast<Eigen::Index>(active.size())));
    const Var next = g.next(history, z);
    out.steps.push_back(next);
    out.members.push_back(active);
    active = still_inside(next, active);
  }
  return out;
}

DiscTerms disc_terms(Tape& tape, const DiscriminatorGraph& d, const WindowVars& w, bool real) {
  auto log_score = [&](Var v) {
    return tape.sum(tape.log(real ? v : tape.affine(v, -1.0, 1.0), kProbabilityFloor));
  };
  DiscTerms out;
  out.entry = log_score(d.entry(w.entry));
  out.continuation = zero_scalar(tape);
  for (std::size_t g = 0; g < 3; ++g) {
    if (w.count[g] == 0) continue;
    out.continuation = tape.add(out.continuation, log_score(d.next(w.history[g], w.candidate[g])));
  }
  return out;
}

Var l2_term(Tape& tape, const GeneratorGraph& g, const Normalizer& norm, const WindowVars& real,
            Var noise) {
  if (real.count[2] == 0) return zero_scalar(tape);
  const Var predicted = g.next(real.history[2], noise);
  const Vec2 s = norm.scale();
  const Var diff = tape.scale_rows(tape.sub(real.candidate[2], predicted), Eigen::Vector2d(s.x, s.y));
  return tape.sum(tape.col_norm(diff));
}

GanLoss gan_loss(const DiscriminatorParams& d, const GeneratorParams& g, const Normalizer& norm,
                 std::span<const Trajectory> real, std::span<const Trajectory> fake,
                 std::mt19937_64& rng) {
  if (real.empty() || fake.empty()) throw ContractError("gan_loss: batches must be nonempty");
  Tape tape;
  const DiscriminatorGraph dg(tape, d, false);
  const GeneratorGraph gg(tape, g, false);
  const WindowVars rw = make_windows(tape, bind_batch(tape, make_step_batch(real, norm)));
  const WindowVars fw = make_windows(tape, bind_batch(tape, make_step_batch(fake, norm)));
  const DiscTerms tr = disc_terms(tape, dg, rw, true);
  const DiscTerms tf = disc_terms(tape, dg, fw, false);
  const Var z = tape.constant(sample_noise(rng, rw.count[2]));
  GanLoss out;
  out.entry = tape.scalar(tr.entry) + tape.scalar(tf.entry);
  out.continuation = tape.scalar(tr.continuation) + tape.scalar(tf.continuation);
  out.l2 = tape.scalar(l2_term(tape, gg, norm, rw, z));
  return out;
}

std::pair<double, double> discriminator_step(DiscriminatorParams& d, nn::AdamState& state,
                                             const Windows& real, const Windows& fake) {
  Tape tape;
  const DiscriminatorGraph dg(tape, d, true);
  const DiscTerms tr = disc_terms(tape, dg, bind_windows(tape, real), true);
  const DiscTerms tf = disc_terms(tape, dg, bind_windows(tape, fake), false);
  const Var entry = tape.add(tr.entry, tf.entry);
  const Var cont = tape.add(tr.continuation, tf.continuation);
  tape.backward(tape.scale(tape.add(entry, cont), -1.0));
  auto params = d.parameters();
  const auto grads = nn::gradients(tape, params);
  nn::adam_step(params, grads, state);
  return {tape.scalar(entry), tape.scalar(cont)};
}

DiscriminatorParams unroll_discriminator(const DiscriminatorParams& d, const nn::AdamState& state,
                                         const Windows& real, const Windows& fake, std::size_t u) {
  DiscriminatorParams copy = d;
  nn::AdamState s = state;
  for (std::size_t i = 0; i < u; ++i) discriminator_step(copy, s, real, fake);
  return copy;
}

// ---- Single-sample inference -------------------------------------------

std::pair<Point2, Point2> gen_entry(const GeneratorParams& g, const Normalizer& norm,
                                    const Eigen::VectorXd& z) {
  if (z.size() != kNoiseDim) throw ContractError("gen_entry: noise must have 3 entries");
  Tape tape;
  const GeneratorGraph gg(tape, g, false);
  const auto [p0, p1] = gg.entry(tape.constant(z));
  return {norm.denormalize(point_at(tape.value(p0), 0)), norm.denormalize(point_at(tape.value(p1), 0))};
}

Point2 gen_next(const GeneratorParams& g, const Normalizer& norm, std::span<const Point2> history,
                const Eigen::VectorXd& z) {
  if (history.size() < 2) throw ContractError("gen_next: history needs at least 2 points");
  if (z.size() != kNoiseDim) throw ContractError("gen_next: noise must have 3 entries");
  Tape tape;
  const GeneratorGraph gg(tape, g, false);
  std::vector<Var> steps;
  for (const auto& p : last_points(history)) steps.push_back(tape.constant(column(norm.normalize(p))));
  const Var next = gg.next(steps, tape.constant(z));
  return norm.denormalize(point_at(tape.value(next), 0));
}

Trajectory gen_trajectory(const GeneratorParams& g, const Normalizer& norm, std::mt19937_64& rng,
                          std::size_t n_max, double dt) {
  Tape tape;
  const GeneratorGraph gg(tape, g, false);
  const StepVars vars = generate_batch(tape, gg, norm, rng, 1, n_max);
  auto pts = to_trajectories(batch_values(tape, vars), norm, dt).front().points();
  const auto& r = norm.region();
  pts[0] = {std::clamp(pts[0].x, r.x_min(), r.x_max()), std::clamp(pts[0].y, r.y_min(), r.y_max())};
  return Trajectory(std::move(pts), dt);
}

double disc_entry(const DiscriminatorParams& d, const Normalizer& norm, const Point2& p0,
                  const Point2& p1) {
  Tape tape;
  const DiscriminatorGraph dg(tape, d, false);
  Tensor pair(4, 1);
  const Point2 q0 = norm.normalize(p0);
  const Point2 q1 = norm.normalize(p1);
  pair << q0.x, q0.y, q1.x, q1.y;
  return tape.value(dg.entry(tape.constant(pair)))(0, 0);
}

double disc_next(const DiscriminatorParams& d, const Normalizer& norm,
                 std::span<const Point2> history, const Point2& candidate) {
  if (history.size() < 2) throw ContractError("disc_next: history needs at least 2 points");
  Tape tape;
  const DiscriminatorGraph dg(tape, d, false);
  std::vector<Var> steps;
  for (const auto& p : last_points(history)) steps.push_back(tape.constant(column(norm.normalize(p))));
  return tape.value(dg.next(steps, tape.constant(column(norm.normalize(candidate)))))(0, 0);
}

std::vector<double> disc_trajectory(const DiscriminatorParams& d, const Normalizer& norm,
                                    const Trajectory& traj) {
  Tape tape;
  const DiscriminatorGraph dg(tape, d, false);
  const std::array<Trajectory, 1> one = {traj};
  const WindowVars w = make_windows(tape, bind_batch(tape, make_step_batch(one, norm)));
  std::vector<double> out = {tape.value(dg.entry(w.entry))(0, 0)};
  // Groups hold k = 2, k = 3 and k >= 4 in order.
  for (std::size_t g = 0; g < 3; ++g) {
    if (w.count[g] == 0) continue;
    const Tensor& v = tape.value(dg.next(w.history[g], w.candidate[g]));
    for (Eigen::Index j = 0; j < v.cols(); ++j) out.push_back(v(0, j));
  }
  return out;
}

// ---- Training --------------------------------------------------------------

TrainResult train(const Dataset& data, const TrainConfig& cfg, const ProgressFn& progress) {
  if (data.empty()) throw ContractError("train: dataset is empty");
  if (cfg.n_max < 2) throw ContractError("train: n_max must be >= 2");
  const Normalizer norm(data.region, cfg.margin);
  std::mt19937_64 init_rng = make_stream(cfg.seed, RngStream::kInit);
  std::mt19937_64 rng = make_stream(cfg.seed, RngStream::kTrain);

  TrainResult out{GeneratorParams::make(), DiscriminatorParams::make(), {}};
  init_uniform(out.g, init_rng);
  init_uniform(out.d, init_rng);
  auto g_params = out.g.parameters();
  nn::AdamState g_adam = nn::make_adam_state(g_params, cfg.adam);
  nn::AdamState d_adam = nn::make_adam_state(out.d.parameters(), cfg.adam);

  const std::size_t n = data.size();
  const std::size_t batch = cfg.batch_size > 0 ? cfg.batch_size : std::min<std::size_t>(n, 64);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  out.log.reserve(cfg.iterations);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::vector<Trajectory> real;
    real.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) real.push_back(data.trajectories[pick(rng)]);
    Windows real_w;
    {
      Tape scratch;
      real_w = window_values(scratch, make_windows(scratch, bind_batch(scratch, make_step_batch(real, norm))));
    }

    Tape tape;
    const GeneratorGraph gen(tape, out.g, true);
    const StepVars fake = generate_batch(tape, gen, norm, rng, batch, cfg.n_max);
    const WindowVars fake_vars = make_windows(tape, fake);
    const Windows fake_w = window_values(tape, fake_vars);

    for (std::size_t s = 0; s < cfg.d_steps; ++s) discriminator_step(out.d, d_adam, real_w, fake_w);
    const DiscriminatorParams ahead = unroll_discriminator(out.d, d_adam, real_w, fake_w, cfg.unroll);

    // The unrolled discriminator enters as a constant: first-order unrolling.
    const DiscriminatorGraph disc(tape, ahead, false);
    const DiscTerms tf = disc_terms(tape, disc, fake_vars, false);
    const WindowVars real_vars = bind_windows(tape, real_w);
    const DiscTerms tr = disc_terms(tape, disc, real_vars, true);
    const Var z = tape.constant(sample_noise(rng, real_vars.count[2]));
    const Var l2 = l2_term(tape, gen, norm, real_vars, z);
    const Var loss = tape.add(tape.add(tf.entry, tf.continuation), tape.scale(l2, cfg.l2_weight));
    tape.backward(loss);
    nn::adam_step(g_params, nn::gradients(tape, g_params), g_adam);

    LossRecord rec{it, tape.scalar(tr.entry) + tape.scalar(tf.entry),
                   tape.scalar(tr.continuation) + tape.scalar(tf.continuation), tape.scalar(l2)};
    out.log.push_back(rec);
    if (progress) progress(rec);
  }
  return out;
}

// ---- Model files -----------------------------------------------------------

namespace {

std::string join_sizes(const nn::FCBlock& b) {
  std::ostringstream s;
  s << b.in_size();
  for (const auto& l : b.layers) s << ',' << l.out_size();
  return s.str();
}

std::string lstm_sizes(const nn::LSTMCell& c) {
  return std::to_string(c.input_size) + "," + std::to_string(c.hidden_size);
}

std::vector<std::pair<std::string, std::string>> architecture(const GeneratorParams& g,
                                                              const DiscriminatorParams& d) {
  return {{"generator.entry_fc", join_sizes(g.entry_fc)},
          {"generator.cont_lstm", lstm_sizes(g.cont_lstm)},
          {"generator.cont_fc", join_sizes(g.cont_fc)},
          {"discriminator.entry_fc", join_sizes(d.entry_fc)},
          {"discriminator.cont_lstm", lstm_sizes(d.cont_lstm)},
          {"discriminator.cont_fc", join_sizes(d.cont_fc)},
          {"noise_dim", std::to_string(kNoiseDim)},
          {"history", std::to_string(kHistory)}};
}

std::string precise(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

double manifest_number(const nn::Checkpoint& ckpt, const std::string& key) {
  const std::string v = ckpt.manifest_value(key);
  if (v.empty()) throw ModelError("checkpoint manifest is missing '" + key + "'");
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ModelError("checkpoint manifest value for '" + key + "' is not a number: " + v);
  }
}

void load_into(const nn::Checkpoint& ckpt, std::vector<nn::Parameter*> params) {
  for (auto* p : params) {
    const nn::Parameter* found = ckpt.find(p->name);
    if (found == nullptr) throw ModelError("checkpoint is missing tensor " + p->name);
    if (found->value.rows() != p->value.rows() || found->value.cols() != p->value.cols()) {
      throw ModelError("tensor " + p->name + " has shape " + std::to_string(found->value.rows()) +
                       "," + std::to_string(found->value.cols()) + ", expected " +
                       std::to_string(p->value.rows()) + "," + std::to_string(p->value.cols()));
    }
    p->value = found->value;
  }
}

}  // namespace

nn::Checkpoint to_checkpoint(const GanModel& model) {
  nn::Checkpoint ckpt;
  ckpt.manifest = architecture(model.g, model.d);
  const auto& r = model.region;
  ckpt.manifest.emplace_back("dt", precise(model.dt));
  ckpt.manifest.emplace_back("region", precise(r.x_min()) + "," + precise(r.y_min()) + "," +
                                           precise(r.x_max()) + "," + precise(r.y_max()));
  ckpt.manifest.emplace_back("margin", precise(model.margin));
  ckpt.manifest.emplace_back("seed", std::to_string(model.seed));
  ckpt.manifest.emplace_back("n_max", std::to_string(model.n_max));
  for (const auto* p : model.g.parameters()) ckpt.tensors.push_back(*p);
  for (const auto* p : model.d.parameters()) ckpt.tensors.push_back(*p);
  return ckpt;
}

GanModel from_checkpoint(const nn::Checkpoint& ckpt) {
  GeneratorParams g = GeneratorParams::make();
  DiscriminatorParams d = DiscriminatorParams::make();
  for (const auto& [key, expected] : architecture(g, d)) {
    const std::string got = ckpt.manifest_value(key);
    if (got != expected) {
      throw ModelError("architecture mismatch for " + key + ": checkpoint has '" + got +
                       "', expected '" + expected + "'");
    }
  }
  load_into(ckpt, g.parameters());
  load_into(ckpt, d.parameters());

  const std::string region = ckpt.manifest_value("region");
  std::array<double, 4> b{};
  {
    std::istringstream in(region);
    char comma = 0;
    if (!(in >> b[0] >> comma >> b[1] >> comma >> b[2] >> comma >> b[3])) {
      throw ModelError("checkpoint manifest has a malformed region: '" + region + "'");
    }
  }
  RegionOfInterest roi = [&] {
    try {
      return RegionOfInterest(b[0], b[1], b[2], b[3]);
    } catch (const DomainError& e) {
      throw ModelError(std::string("checkpoint region: ") + e.what());
    }
  }();
  GanModel model{std::move(g), std::move(d), roi};
  model.margin = manifest_number(ckpt, "margin");
  model.dt = manifest_number(ckpt, "dt");
  model.seed = static_cast<std::uint64_t>(std::stoull(ckpt.manifest_value("seed").empty()
                                                          ? "0"
                                                          : ckpt.manifest_value("seed")));
  model.n_max = static_cast<std::size_t>(manifest_number(ckpt, "n_max"));
  if (!(model.dt > 0.0)) throw ModelError("checkpoint dt must be positive");
  return model;
}

}  // namespace crowdforge::gan
