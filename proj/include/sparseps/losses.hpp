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

// Symmetric, asymmetric and reconstruction losses on observation maps, with
// exact gradients and a finite-difference checker.
//
// All map norms are plain L1 sums over the w*w cells. Angles inside losses
// are in radians. The L1 subgradient at zero is taken as zero.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "sparseps/errors.hpp"
#include "sparseps/geometry.hpp"
#include "sparseps/obsmap.hpp"

namespace sparseps {

struct LossWeights {
  double lambda_s = 2e-2;
  double lambda_a = 2e-5;
  double lambda_c = 50.0;
  double eta = 1.0;
};

template <typename T>
T sign_of(T v) {
  return T((v > T(0)) - (v < T(0)));
}

template <typename T>
std::array<T, 2> axis_from_components(T nx, T ny) {
  using std::hypot;
  const T len = hypot(nx, ny);
  if (len <= T(1e-6)) return {T(1), T(0)};
  return {nx / len, ny / len};
}

// Loss value plus, optionally, its gradient with respect to the map cells
// and to the (unnormalized) in-plane axis components.
template <typename T>
struct LossEval {
  T value = 0;
  std::vector<T> grad_map;
  std::array<T, 2> grad_axis{0, 0};
};

// |D - r(D, axis)|_1
template <typename T>
LossEval<T> eval_sym(std::span<const T> d, int w, std::array<T, 2> axis, bool grads) {
  const MirrorOperator<T> op(w, axis[0], axis[1]);
  const std::vector<T> reflected = op.apply(d);
  LossEval<T> out;
  std::vector<T> s(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    const T res = d[k] - reflected[k];
    out.value += res < 0 ? -res : res;
    s[k] = sign_of(res);
  }
  if (!grads) return out;
  out.grad_map = s;
  std::vector<T> back(d.size(), T(0));
  op.apply_transpose(s, back);
  for (std::size_t k = 0; k < d.size(); ++k) out.grad_map[k] -= back[k];
  const auto ga = op.axis_gradient(d, s);
  out.grad_axis = {-ga[0], -ga[1]};
  return out;
}

// | |D - r(D)|_1 - eta | + lambda_c | |p(D) - r(p(D))|_1 - eta |
template <typename T>
LossEval<T> eval_asym(std::span<const T> d, int w, std::array<T, 2> axis, const LossWeights& lw,
                      bool grads) {
  const T eta = T(lw.eta), lc = T(lw.lambda_c);
  const LossEval<T> full = eval_sym<T>(d, w, axis, grads);
  const std::vector<T> pooled = avg_pool_values<T>(d, w);
  const LossEval<T> coarse = eval_sym<T>(pooled, w / 2, axis, grads);

  LossEval<T> out;
  const T r_full = full.value - eta, r_coarse = coarse.value - eta;
  out.value = (r_full < 0 ? -r_full : r_full) + lc * (r_coarse < 0 ? -r_coarse : r_coarse);
  if (!grads) return out;

  const T s_full = sign_of(r_full), s_coarse = lc * sign_of(r_coarse);
  out.grad_map.assign(d.size(), T(0));
  const int h = w / 2;
  for (int r = 0; r < w; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t k = std::size_t(r) * w + c;
      const std::size_t p = std::size_t(r / 2) * h + c / 2;
      out.grad_map[k] = s_full * full.grad_map[k] + s_coarse * coarse.grad_map[p] / 4;
    }
  }
  for (int i = 0; i < 2; ++i) out.grad_axis[i] = s_full * full.grad_axis[i] + s_coarse * coarse.grad_axis[i];
  return out;
}

// Map part of the interpolation reconstruction loss:
// |D - D_gt|_1 + |M_s o (D - D_gt)|_1
template <typename T>
LossEval<T> eval_map_recon(std::span<const T> d, std::span<const T> d_gt,
                           std::span<const std::uint8_t> sparse_mask, bool grads) {
  LossEval<T> out;
  if (grads) out.grad_map.resize(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    const T res = d[k] - d_gt[k];
    const T weight = sparse_mask[k] ? T(2) : T(1);
    out.value += weight * (res < 0 ? -res : res);
    if (grads) out.grad_map[k] = weight * sign_of(res);
  }
  return out;
}

inline std::array<double, 2> axis_of(const UnitVector3& n) {
  return axis_from_components(n.x(), n.y());
}

inline double sym_loss(const ObservationMap& d, const UnitVector3& n) {
  return eval_sym<double>(d.values, d.width, axis_of(n), false).value;
}

inline double asym_loss(const ObservationMap& d, const UnitVector3& n, const LossWeights& lw = {}) {
  return eval_asym<double>(d.values, d.width, axis_of(n), lw, false).value;
}

inline double ne_recon_loss(const UnitVector3& n, const UnitVector3& n_gt) { return angle_rad(n, n_gt); }

inline double li_recon_loss(const UnitVector3& n, const UnitVector3& n_gt, const ObservationMap& d,
                            const ObservationMap& d_gt, std::span<const std::uint8_t> sparse_mask) {
  require_same_shape(d, d_gt);
  if (sparse_mask.size() != d.size()) throw ShapeError("sparse mask size does not match the map");
  return ne_recon_loss(n, n_gt) + eval_map_recon<double>(d.values, d_gt.values, sparse_mask, false).value;
}

// Objective of the interpolation model: predicted map D against the true
// normal.
inline double li_total_loss(const UnitVector3& n, const UnitVector3& n_gt, const ObservationMap& d,
                            const ObservationMap& d_gt, std::span<const std::uint8_t> sparse_mask,
                            const LossWeights& lw = {}) {
  return li_recon_loss(n, n_gt, d, d_gt, sparse_mask) + lw.lambda_s * sym_loss(d, n_gt) +
         lw.lambda_a * asym_loss(d, n_gt, lw);
}

// Objective of the normal model: true map D_gt against the predicted normal.
inline double ne_total_loss(const UnitVector3& n, const UnitVector3& n_gt, const ObservationMap& d_gt,
                            const LossWeights& lw = {}) {
  return ne_recon_loss(n, n_gt) + lw.lambda_s * sym_loss(d_gt, n) + lw.lambda_a * asym_loss(d_gt, n, lw);
}

// d arccos(n . g) / dn, zero where the derivative is unbounded (n = +-g).
inline Vec3 angle_gradient(const UnitVector3& n, const UnitVector3& g) {
  const double c = clamped_dot(n, g);
  const double s2 = 1.0 - c * c;
  if (s2 < 1e-14) return {};
  return (-1.0 / std::sqrt(s2)) * g.vec();
}

// Gradient of lambda_s * L_s(D, n) + lambda_a * L_a(D, n) with respect to the
// components of n (through the symmetry axis).
inline Vec3 symmetry_normal_gradient(const ObservationMap& d, const UnitVector3& n, const LossWeights& lw) {
  const auto axis = axis_of(n);
  const auto s = eval_sym<double>(d.values, d.width, axis, true);
  const auto a = eval_asym<double>(d.values, d.width, axis, lw, true);
  const double gax = lw.lambda_s * s.grad_axis[0] + lw.lambda_a * a.grad_axis[0];
  const double gay = lw.lambda_s * s.grad_axis[1] + lw.lambda_a * a.grad_axis[1];
  const auto j = axis_jacobian(n);  // row-major d(axis)/d(n.x, n.y)
  return {j[0] * gax + j[2] * gay, j[1] * gax + j[3] * gay, 0.0};
}

enum class LossKind { kSym, kAsym, kLiRecon };

// Everything besides D that a map loss needs. `normal` sets the symmetry
// axis; `d_gt` and `sparse_mask` are only read by kLiRecon.
struct MapLossContext {
  UnitVector3 normal;
  std::vector<double> d_gt;
  std::vector<std::uint8_t> sparse_mask;
  LossWeights weights;
};

template <typename T>
T map_loss_value(LossKind kind, std::span<const T> d, int w, const MapLossContext& ctx) {
  const auto axis = axis_from_components<T>(T(ctx.normal.x()), T(ctx.normal.y()));
  switch (kind) {
    case LossKind::kSym:
      return eval_sym<T>(d, w, axis, false).value;
    case LossKind::kAsym:
      return eval_asym<T>(d, w, axis, ctx.weights, false).value;
    case LossKind::kLiRecon: {
      const std::vector<T> gt(ctx.d_gt.begin(), ctx.d_gt.end());
      return eval_map_recon<T>(d, gt, ctx.sparse_mask, false).value;
    }
  }
  return T(0);
}

inline void check_context(LossKind kind, const ObservationMap& d, const MapLossContext& ctx) {
  if (kind == LossKind::kLiRecon &&
      (ctx.d_gt.size() != d.size() || ctx.sparse_mask.size() != d.size())) {
    throw ShapeError("reconstruction loss needs d_gt and sparse_mask matching the map");
  }
}

// Gradient of the chosen scalar loss with respect to every cell of D.
inline std::vector<double> grad_map(LossKind kind, const ObservationMap& d, const MapLossContext& ctx) {
  check_context(kind, d, ctx);
  const auto axis = axis_of(ctx.normal);
  switch (kind) {
    case LossKind::kSym:
      return eval_sym<double>(d.values, d.width, axis, true).grad_map;
    case LossKind::kAsym:
      return eval_asym<double>(d.values, d.width, axis, ctx.weights, true).grad_map;
    case LossKind::kLiRecon:
      return eval_map_recon<double>(d.values, ctx.d_gt, ctx.sparse_mask, true).grad_map;
  }
  return {};
}

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;  // cells whose +-h probe would cross an L1 kink
};

// Compares grad_map against central differences of the loss evaluated in
// extended precision. Cells where a +-h step changes the sign of any L1
// residual the cell feeds are not differentiable at that scale and are
// skipped.
inline FiniteDiffReport finite_diff_check(LossKind kind, const ObservationMap& d, const MapLossContext& ctx,
                                          double h) {
  if (!(h > 0.0)) throw Error("finite_diff_check: h must be positive");
  check_context(kind, d, ctx);
  using L = long double;
  const int w = d.width;
  const std::size_t n = d.size();
  const std::vector<double> analytic = grad_map(kind, d, ctx);

  // Residual margins guarding the kink test.
  std::vector<bool> near_kink(n, false);
  const double guard = 1.5 * h;
  if (kind == LossKind::kLiRecon) {
    for (std::size_t k = 0; k < n; ++k) near_kink[k] = std::abs(d.values[k] - ctx.d_gt[k]) <= guard;
  } else {
    auto flag_mirror_kinks = [&](std::span<const double> vals, int width, int stride) {
      const MirrorOperator<double> op(width, axis_from_normal(ctx.normal));
      const auto refl = op.apply(vals);
      for (std::size_t k = 0; k < vals.size(); ++k) {
        if (std::abs(vals[k] - refl[k]) > guard) continue;
        // Residual k depends on cell k and on every tap of k.
        std::vector<std::size_t> inputs{k};
        for (const auto& t : op.taps(k)) inputs.push_back(std::size_t(t.index));
        for (std::size_t src : inputs) {
          const int r = int(src) / width, c = int(src) % width;
          for (int dr = 0; dr < stride; ++dr) {
            for (int dc = 0; dc < stride; ++dc) {
              near_kink[std::size_t(r * stride + dr) * w + (c * stride + dc)] = true;
            }
          }
        }
      }
    };
    flag_mirror_kinks(d.values, w, 1);
    if (kind == LossKind::kAsym) {
      const auto pooled = avg_pool_values<double>(d.values, w);
      flag_mirror_kinks(pooled, w / 2, 2);
      const double s_full = sym_loss(d, ctx.normal);
      const double s_coarse = eval_sym<double>(pooled, w / 2, axis_of(ctx.normal), false).value;
      if (std::abs(s_full - ctx.weights.eta) <= 8 * h || std::abs(s_coarse - ctx.weights.eta) <= 8 * h) {
        std::fill(near_kink.begin(), near_kink.end(), true);
      }
    }
  }

  FiniteDiffReport report;
  std::vector<L> probe(d.values.begin(), d.values.end());
  for (std::size_t k = 0; k < n; ++k) {
    if (near_kink[k]) {
      ++report.skipped;
      continue;
    }
    const L base = probe[k];
    probe[k] = base + L(h);
    const L up = map_loss_value<L>(kind, probe, w, ctx);
    probe[k] = base - L(h);
    const L down = map_loss_value<L>(kind, probe, w, ctx);
    probe[k] = base;
    const double fd = double((up - down) / (2 * L(h)));
    const double rel = std::abs(analytic[k] - fd) / (std::abs(fd) + 1e-8);
    report.max_rel_error = std::max(report.max_rel_error, rel);
    ++report.checked;
  }
  return report;
}

}  // namespace sparseps
