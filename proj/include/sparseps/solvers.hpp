// Copyright 2026 The sparseps Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Normal estimation and lighting interpolation: the Lambertian
// least-squares baseline, a deterministic symmetry-aware inpainter, and the
// two small networks (interpolation model f, normal model g) trained with
// an alternating schedule.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "sparseps/errors.hpp"
#include "sparseps/geometry.hpp"
#include "sparseps/losses.hpp"
#include "sparseps/mlp.hpp"
#include "sparseps/obsmap.hpp"
#include "sparseps/render.hpp"

namespace sparseps {

// ---------------------------------------------------------------------------
// Least-squares Lambertian photometric stereo

struct LsResult {
  UnitVector3 normal;
  double albedo = 0.0;
};

// Solves min |L b - i|_2 for b = albedo * n. The pseudo-inverse of the light
// matrix is factored once so many pixels can share one light set.
class LambertianLeastSquares {
 public:
  explicit LambertianLeastSquares(std::span<const UnitVector3> lights) {
    if (lights.size() < 3) throw DegenerateLightingError("need at least 3 lights");
    Eigen::MatrixXd l(Eigen::Index(lights.size()), 3);
    for (std::size_t i = 0; i < lights.size(); ++i) {
      l.row(Eigen::Index(i)) << lights[i].x(), lights[i].y(), lights[i].z();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(l, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv[2] > 1e-9 * sv[0])) throw DegenerateLightingError("light directions do not span 3D");
    pinv_ = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  }

  std::size_t light_count() const { return std::size_t(pinv_.cols()); }

  // Throws NormalizationError when the solution is zero (e.g. all-dark input).
  LsResult solve(std::span<const double> irradiance) const {
    if (irradiance.size() != light_count()) throw ShapeError("irradiance count does not match lights");
    const Eigen::Map<const Eigen::VectorXd> i(irradiance.data(), Eigen::Index(irradiance.size()));
    Eigen::Vector3d b = pinv_ * i;
    if (b.z() < 0.0) b = -b;
    return {normalize({b.x(), b.y(), b.z()}), b.norm()};
  }

 private:
  Eigen::MatrixXd pinv_;  // 3 x k
};

inline LsResult ls_normal(std::span<const UnitVector3> lights, std::span<const double> irradiances) {
  return LambertianLeastSquares(lights).solve(irradiances);
}

inline LsResult ls_normal(const PixelSamples& samples) {
  std::vector<UnitVector3> lights;
  std::vector<double> irr;
  for (const auto& o : samples.observations) {
    lights.push_back(o.light);
    irr.push_back(o.irradiance);
  }
  return ls_normal(lights, irr);
}

// Direction whose orthographic projection is the center of map cell k.
inline std::optional<UnitVector3> cell_direction(std::size_t k, int w) {
  const double x = (double(k % std::size_t(w)) + 0.5) * 2.0 / w - 1.0;
  const double y = (double(k / std::size_t(w)) + 0.5) * 2.0 / w - 1.0;
  const double rr = x * x + y * y;
  if (rr >= 1.0) return std::nullopt;
  return normalize({x, y, std::sqrt(1.0 - rr)});
}

// LS over the cells of a dense map, each cell read as an observation under
// its center direction. Cells at or below `min_value` (attached shadow) are
// left out because the clipped Lambertian model is not linear there.
inline LsResult ls_normal_from_map(const ObservationMap& d, double min_value = 0.0) {
  std::vector<UnitVector3> lights;
  std::vector<double> irr;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!d.mask[k] || d.values[k] <= min_value) continue;
    if (const auto dir = cell_direction(k, d.width)) {
      lights.push_back(*dir);
      irr.push_back(d.values[k]);
    }
  }
  return ls_normal(lights, irr);
}

// ---------------------------------------------------------------------------
// Symmetry-aware inpainting

// Fills a sparse map in three passes: known cells are kept, empty cells
// whose reflection about the hint axis is known take that value, and the
// rest grow in by 3x3 masked means until the grid is full. `iterations`
// further relaxation sweeps then smooth the grown cells. Known cells are
// never modified.
inline ObservationMap symmetry_inpaint(const ObservationMap& sparse, const UnitVector3& n_hint, int iterations,
                                       bool use_mirror = true) {
  const int w = sparse.width;
  const std::size_t n = sparse.size();
  if (sparse.occupied() == 0) throw DegenerateSamplesError("symmetry_inpaint needs at least one known cell");

  std::vector<double> vals = sparse.values;
  std::vector<std::uint8_t> filled = sparse.mask;
  std::vector<std::uint8_t> pinned = sparse.mask;  // not touched by relaxation

  if (use_mirror) {
    const MirrorOperator<double> op(w, axis_from_normal(n_hint));
    for (std::size_t k = 0; k < n; ++k) {
      if (sparse.mask[k]) continue;
      const int src = op.nearest_source(k);
      if (src >= 0 && sparse.mask[std::size_t(src)]) {
        vals[k] = sparse.values[std::size_t(src)];
        filled[k] = 1;
        pinned[k] = 1;
      }
    }
  }

  auto neighbourhood_mean = [&](int r, int c, const std::vector<std::uint8_t>& have) -> std::optional<double> {
    double sum = 0.0;
    int count = 0;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int rr = r + dr, cc = c + dc;
        if (rr < 0 || cc < 0 || rr >= w || cc >= w) continue;
        const std::size_t j = std::size_t(rr) * w + cc;
        if (!have[j]) continue;
        sum += vals[j];
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return sum / count;
  };

  // Growth: each sweep fills every empty cell that touches a filled one.
  for (;;) {
    std::vector<std::pair<std::size_t, double>> grown;
    for (int r = 0; r < w; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t k = std::size_t(r) * w + c;
        if (filled[k]) continue;
        if (const auto m = neighbourhood_mean(r, c, filled)) grown.emplace_back(k, *m);
      }
    }
    if (grown.empty()) break;
    for (const auto& [k, v] : grown) {
      vals[k] = v;
      filled[k] = 1;
    }
  }

  const std::vector<std::uint8_t> all(n, 1);
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next = vals;
    for (int r = 0; r < w; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t k = std::size_t(r) * w + c;
        if (!pinned[k]) next[k] = *neighbourhood_mean(r, c, all);
      }
    }
    vals = std::move(next);
  }

  ObservationMap out(w);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = sparse.mask[k] ? sparse.values[k] : std::clamp(vals[k], 0.0, 1.0);
  }
  std::fill(out.mask.begin(), out.mask.end(), std::uint8_t{1});
  return out;
}

// ---------------------------------------------------------------------------
// Interpolation (LI) and normal-estimation (NE) models

inline MlpModel make_li_model(int w, Rng& rng, const std::vector<int>& hidden = {256, 256}) {
  std::vector<int> dims{2 * w * w};
  std::vector<Activation> acts;
  for (int h : hidden) {
    dims.push_back(h);
    acts.push_back(Activation::kRelu);
  }
  dims.push_back(w * w);
  acts.push_back(Activation::kSigmoid);
  return MlpModel(dims, acts, rng);
}

inline MlpModel make_ne_model(int w, Rng& rng, const std::vector<int>& hidden = {128, 64}) {
  std::vector<int> dims{2 * w * w};
  std::vector<Activation> acts;
  for (int h : hidden) {
    dims.push_back(h);
    acts.push_back(Activation::kRelu);
  }
  dims.push_back(3);
  acts.push_back(Activation::kLinear);
  return MlpModel(dims, acts, rng);
}

// Unit normal from a raw 3-vector, flipped to face the viewer.
inline UnitVector3 normal_from_raw(const Eigen::Vector3d& y) {
  const double sign = y.z() < 0.0 ? -1.0 : 1.0;
  return normalize({sign * y.x(), sign * y.y(), sign * y.z()});
}

// d loss / d raw given d loss / d n for n = normal_from_raw(raw).
inline Eigen::Vector3d raw_gradient(const Eigen::Vector3d& raw, const UnitVector3& n, const Vec3& grad_n) {
  const double sign = raw.z() < 0.0 ? -1.0 : 1.0;
  const Eigen::Vector3d nv(n.x(), n.y(), n.z());
  const Eigen::Vector3d g(grad_n.x, grad_n.y, grad_n.z);
  return sign * (g - nv * nv.dot(g)) / raw.norm();
}

// Column layout of the interpolation model input: map values, then mask.
inline Eigen::VectorXd li_input(const ObservationMap& s) {
  const Eigen::Index n = Eigen::Index(s.size());
  Eigen::VectorXd x(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x[k] = s.values[std::size_t(k)];
    x[n + k] = s.mask[std::size_t(k)];
  }
  return x;
}

inline ObservationMap li_forward(const MlpModel& li, const ObservationMap& s) {
  if (li.input_dim() != int(2 * s.size()) || li.output_dim() != int(s.size())) {
    throw ShapeError("interpolation model does not match map width " + std::to_string(s.width));
  }
  const Eigen::MatrixXd out = li.forward(li_input(s));
  return ObservationMap::dense(s.width, std::vector<double>(out.data(), out.data() + out.size()));
}

inline UnitVector3 ne_forward(const MlpModel& ne, const ObservationMap& s, const ObservationMap& d) {
  require_same_shape(s, d);
  if (ne.input_dim() != int(2 * s.size()) || ne.output_dim() != 3) {
    throw ShapeError("normal model does not match map width " + std::to_string(s.width));
  }
  const Eigen::Index n = Eigen::Index(s.size());
  Eigen::VectorXd x(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x[k] = s.values[std::size_t(k)];
    x[n + k] = d.values[std::size_t(k)];
  }
  const Eigen::MatrixXd y = ne.forward(x);
  return normal_from_raw(y.col(0));
}

struct InferResult {
  ObservationMap dense;
  UnitVector3 normal;
};

inline InferResult infer(const MlpModel& li, const MlpModel& ne, const PixelSamples& samples,
                         int w = kDefaultMapWidth) {
  const ObservationMap s = build_observation_map(samples, w);
  ObservationMap d = li_forward(li, s);
  const UnitVector3 n = ne_forward(ne, s, d);
  return {std::move(d), n};
}

// Batched inference; entries whose samples cannot form a map (all dark)
// come back empty.
inline std::vector<std::optional<UnitVector3>> infer_normals(const MlpModel& li, const MlpModel& ne,
                                                             std::span<const PixelSamples> points, int w) {
  const Eigen::Index cells = Eigen::Index(w) * w;
  std::vector<std::optional<UnitVector3>> out(points.size());
  std::vector<Eigen::Index> ok;
  Eigen::MatrixXd x(2 * cells, Eigen::Index(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      x.col(Eigen::Index(ok.size())) = li_input(build_observation_map(points[i], w));
      ok.push_back(Eigen::Index(i));
    } catch (const DegenerateSamplesError&) {
    }
  }
  if (ok.empty()) return out;
  x.conservativeResize(Eigen::NoChange, Eigen::Index(ok.size()));
  const Eigen::MatrixXd d = li.forward(x);
  Eigen::MatrixXd xn(2 * cells, x.cols());
  xn.topRows(cells) = x.topRows(cells);
  xn.bottomRows(cells) = d;
  const Eigen::MatrixXd y = ne.forward(xn);
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    try {
      out[std::size_t(ok[std::size_t(j)])] = normal_from_raw(y.col(j));
    } catch (const NormalizationError&) {
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alternating training

struct TrainingExample {
  PixelSamples samples;  // observation pool; sparse inputs are drawn from it
  UnitVector3 normal;
  ObservationMap d_gt;
};

// A minibatch in model layout: columns are examples.
struct Minibatch {
  int width = 0;
  Eigen::MatrixXd sparse;  // 2w^2 x B: sparse map values, then mask
  Eigen::MatrixXd d_gt;    // w^2 x B
  std::vector<UnitVector3> normals;

  Eigen::Index cells() const { return Eigen::Index(width) * width; }
  Eigen::Index size() const { return sparse.cols(); }
};

inline Minibatch make_minibatch(const std::vector<ObservationMap>& sparse, const std::vector<ObservationMap>& d_gt,
                                const std::vector<UnitVector3>& normals) {
  if (sparse.empty() || sparse.size() != d_gt.size() || sparse.size() != normals.size()) {
    throw ShapeError("minibatch parts differ in length");
  }
  Minibatch b;
  b.width = sparse.front().width;
  const Eigen::Index cells = b.cells(), count = Eigen::Index(sparse.size());
  b.sparse.resize(2 * cells, count);
  b.d_gt.resize(cells, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const auto& s = sparse[std::size_t(j)];
    const auto& g = d_gt[std::size_t(j)];
    require_same_shape(s, g);
    b.sparse.col(j) = li_input(s);
    b.d_gt.col(j) = Eigen::Map<const Eigen::VectorXd>(g.values.data(), cells);
  }
  b.normals = normals;
  return b;
}

struct ObjectiveResult {
  double loss = 0.0;  // batch mean
  MlpGradients grads;
};

namespace detail {

inline std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j, Eigen::Index offset, Eigen::Index n) {
  return std::vector<double>(m.col(j).data() + offset, m.col(j).data() + offset + n);
}

inline Eigen::MatrixXd ne_inputs(const Minibatch& b, const Eigen::MatrixXd& dense) {
  Eigen::MatrixXd x(2 * b.cells(), b.size());
  x.topRows(b.cells()) = b.sparse.topRows(b.cells());
  x.bottomRows(b.cells()) = dense;
  return x;
}

}  // namespace detail

// Mean over the batch of L_g = arccos(n.n_gt) + l_s L_s(D_gt, n) + l_a L_a(D_gt, n)
// with n = g(S, f(S)); gradients are for the normal model.
inline ObjectiveResult ne_objective(const MlpModel& li, const MlpModel& ne, const Minibatch& b,
                                    const LossWeights& lw) {
  const Eigen::Index cells = b.cells(), count = b.size();
  const Eigen::MatrixXd dense = li.forward(b.sparse);
  const ForwardTape tape = ne.forward_tape(detail::ne_inputs(b, dense));
  const Eigen::MatrixXd& raw = tape.output();

  ObjectiveResult r;
  Eigen::MatrixXd grad_raw(3, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const UnitVector3 n = normal_from_raw(raw.col(j));
    const UnitVector3& g = b.normals[std::size_t(j)];
    const ObservationMap d_gt = ObservationMap::dense(b.width, detail::column(b.d_gt, j, 0, cells));
    r.loss += ne_total_loss(n, g, d_gt, lw);
    const Vec3 grad_n = angle_gradient(n, g) + symmetry_normal_gradient(d_gt, n, lw);
    grad_raw.col(j) = raw_gradient(raw.col(j), n, grad_n);
  }
  r.loss /= double(count);
  grad_raw /= double(count);
  r.grads = ne.backward(tape, grad_raw);
  return r;
}

// Mean over the batch of L_f = arccos(n.n_gt) + |D - D_gt| + |M_s o (D - D_gt)|
// + l_s L_s(D, n_gt) + l_a L_a(D, n_gt) with D = f(S), n = g(S, D); gradients
// are for the interpolation model, including the path through g into D.
inline ObjectiveResult li_objective(const MlpModel& li, const MlpModel& ne, const Minibatch& b,
                                    const LossWeights& lw) {
  const Eigen::Index cells = b.cells(), count = b.size();
  const ForwardTape li_tape = li.forward_tape(b.sparse);
  const Eigen::MatrixXd& dense = li_tape.output();
  const ForwardTape ne_tape = ne.forward_tape(detail::ne_inputs(b, dense));
  const Eigen::MatrixXd& raw = ne_tape.output();

  ObjectiveResult r;
  Eigen::MatrixXd grad_dense(cells, count);
  Eigen::MatrixXd grad_raw(3, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const UnitVector3 n = normal_from_raw(raw.col(j));
    const UnitVector3& g = b.normals[std::size_t(j)];
    const std::vector<double> d = detail::column(dense, j, 0, cells);
    const std::vector<double> d_gt = detail::column(b.d_gt, j, 0, cells);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(cells));
    for (Eigen::Index k = 0; k < cells; ++k) mask[std::size_t(k)] = b.sparse(cells + k, j) > 0.5 ? 1 : 0;

    const auto axis = axis_of(g);
    const auto recon = eval_map_recon<double>(d, d_gt, mask, true);
    const auto sym = eval_sym<double>(d, b.width, axis, true);
    const auto asym = eval_asym<double>(d, b.width, axis, lw, true);
    r.loss += ne_recon_loss(n, g) + recon.value + lw.lambda_s * sym.value + lw.lambda_a * asym.value;
    for (Eigen::Index k = 0; k < cells; ++k) {
      const auto i = std::size_t(k);
      grad_dense(k, j) = recon.grad_map[i] + lw.lambda_s * sym.grad_map[i] + lw.lambda_a * asym.grad_map[i];
    }
    grad_raw.col(j) = raw_gradient(raw.col(j), n, angle_gradient(n, g));
  }
  r.loss /= double(count);
  grad_raw /= double(count);
  grad_dense /= double(count);

  Eigen::MatrixXd grad_ne_input;
  ne.backward(ne_tape, grad_raw, &grad_ne_input);
  grad_dense += grad_ne_input.bottomRows(cells);
  r.grads = li.backward(li_tape, grad_dense);
  return r;
}

enum class UpdateKind : std::uint8_t { kNe, kLi };

struct EpochStats {
  double mean_ne_loss = 0.0;
  double mean_li_loss = 0.0;
  int ne_updates = 0;
  int li_updates = 0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 128;
  int ne_steps_per_li_step = 5;
  int epochs = 10;
  unsigned long long seed = 0;
  LossWeights weights;
  int map_width = kDefaultMapWidth;
  int sparse_lights = 10;  // drawn per use from each example's pool; 0 uses the whole pool
  std::vector<int> li_hidden{256, 256};
  std::vector<int> ne_hidden{128, 64};
  std::function<void(int epoch, const EpochStats&)> on_epoch;
};

struct TrainResult {
  MlpModel li;
  MlpModel ne;
  std::vector<UpdateKind> schedule;
  std::vector<EpochStats> epochs;
};

// Sparse map from `count` observations drawn without replacement. Draws
// that come out all dark are retried; after that the whole pool is used.
inline ObservationMap draw_sparse_map(const PixelSamples& pool, int count, int w, Rng& rng) {
  const std::size_t n = pool.observations.size();
  if (count <= 0 || std::size_t(count) >= n) return build_observation_map(pool, w);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (int attempt = 0; attempt < 8; ++attempt) {
    PixelSamples pick;
    for (int i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> u(std::size_t(i), n - 1);
      std::swap(idx[std::size_t(i)], idx[u(rng)]);
      pick.observations.push_back(pool.observations[idx[std::size_t(i)]]);
    }
    try {
      return build_observation_map(pick, w);
    } catch (const DegenerateSamplesError&) {
    }
  }
  return build_observation_map(pool, w);
}

// Alternates Adam updates: after every `ne_steps_per_li_step` updates of the
// normal model (interpolation model frozen), one update of the
// interpolation model (normal model frozen) on the minibatch of the last
// normal update. Deterministic for a given seed.
inline TrainResult train_alternating(const std::vector<TrainingExample>& dataset, const TrainConfig& cfg) {
  if (dataset.empty()) throw Error("train_alternating: empty dataset");
  if (cfg.ne_steps_per_li_step < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0) || cfg.epochs < 0) {
    throw Error("train_alternating: invalid configuration");
  }
  const int w = cfg.map_width;
  Rng rng(cfg.seed);
  TrainResult result{make_li_model(w, rng, cfg.li_hidden), make_ne_model(w, rng, cfg.ne_hidden), {}, {}};
  AdamOptimizer li_opt(cfg.learning_rate, cfg.beta1, cfg.beta2);
  AdamOptimizer ne_opt(cfg.learning_rate, cfg.beta1, cfg.beta2);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  long step = 0;
  long ne_updates = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + std::size_t(cfg.batch_size));
      std::vector<ObservationMap> sparse, d_gt;
      std::vector<UnitVector3> normals;
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = dataset[order[i]];
        sparse.push_back(draw_sparse_map(ex.samples, cfg.sparse_lights, w, rng));
        d_gt.push_back(ex.d_gt);
        normals.push_back(ex.normal);
      }
      const Minibatch batch = make_minibatch(sparse, d_gt, normals);

      const ObjectiveResult g = ne_objective(result.li, result.ne, batch, cfg.weights);
      if (!std::isfinite(g.loss) || !std::isfinite(g.grads.squared_norm())) {
        throw DivergenceError("normal model loss is not finite", step);
      }
      ne_opt.step(result.ne, g.grads);
      result.schedule.push_back(UpdateKind::kNe);
      stats.mean_ne_loss += g.loss;
      ++stats.ne_updates;
      ++step;
      ++ne_updates;

      if (ne_updates % cfg.ne_steps_per_li_step == 0) {
        const ObjectiveResult f = li_objective(result.li, result.ne, batch, cfg.weights);
        if (!std::isfinite(f.loss) || !std::isfinite(f.grads.squared_norm())) {
          throw DivergenceError("interpolation model loss is not finite", step);
        }
        li_opt.step(result.li, f.grads);
        result.schedule.push_back(UpdateKind::kLi);
        stats.mean_li_loss += f.loss;
        ++stats.li_updates;
        ++step;
      }
    }
    if (stats.ne_updates > 0) stats.mean_ne_loss /= stats.ne_updates;
    if (stats.li_updates > 0) stats.mean_li_loss /= stats.li_updates;
    if (!result.li.all_finite() || !result.ne.all_finite()) {
      throw DivergenceError("model parameters are not finite", step);
    }
    result.epochs.push_back(stats);
    if (cfg.on_epoch) cfg.on_epoch(epoch, stats);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Synthetic training data

// Lambertian or Blinn-Phong material with randomized parameters.
inline BrdfSpec random_brdf(Rng& rng, bool specular_only = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (!specular_only && u(rng) < 0.5) return Lambertian{0.3 + 0.7 * u(rng)};
  const double kd = 0.05 + 0.45 * u(rng);
  const double ks = 0.3 + 0.7 * u(rng);
  const double shininess = std::exp(std::log(5.0) + (std::log(100.0) - std::log(5.0)) * u(rng));
  return BlinnPhong{kd, ks, shininess};
}

struct TrainingSetConfig {
  int points = 2000;
  int pool_lights = 64;       // observations stored per point
  double max_zenith_deg = 75.0;
  int dense_lights = 1000;    // lights behind each reference map
  int map_width = kDefaultMapWidth;
  bool specular_only = false;
};

// Points drawn from orthographic spheres: every point gets a random
// material, a normal distributed like the pixels of a sphere image, a pool
// of observations under random lights, and its dense reference map.
inline std::vector<TrainingExample> make_sphere_training_set(const TrainingSetConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TrainingExample> out;
  out.reserve(std::size_t(cfg.points));
  for (int i = 0; i < cfg.points; ++i) {
    const BrdfSpec brdf = random_brdf(rng, cfg.specular_only);
    double x = 0.0, y = 0.0;
    do {
      x = 2.0 * u(rng) - 1.0;
      y = 2.0 * u(rng) - 1.0;
    } while (x * x + y * y >= 1.0);
    const UnitVector3 n = normalize({x, y, std::sqrt(1.0 - x * x - y * y)});
    TrainingExample ex{{}, n, make_dense_gt_map(n, brdf, cfg.dense_lights, cfg.map_width)};
    ex.samples.normal = n;
    double brightest = 0.0;
    for (const auto& l : sample_hemisphere_lights(cfg.pool_lights, cfg.max_zenith_deg, rng)) {
      ex.samples.observations.push_back({l, shade(n, l, kViewDirection, brdf)});
      brightest = std::max(brightest, ex.samples.observations.back().irradiance);
    }
    if (brightest > 0.0) {
      out.push_back(std::move(ex));
    } else {
      --i;  // every pool light is behind the surface; draw another point
    }
  }
  return out;
}

}  // namespace sparseps
