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

// Observation maps: the fixed-size grid obtained by orthographically
// projecting light directions onto the x-y plane, with v = (0, 0, 1) at the
// center. Columns follow +x and rows follow +y.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparseps/errors.hpp"
#include "sparseps/geometry.hpp"
#include "sparseps/image_io.hpp"

namespace sparseps {

inline constexpr int kDefaultMapWidth = 32;

struct ObservationMap {
  int width = 0;
  std::vector<double> values;        // row-major, width * width
  std::vector<std::uint8_t> mask;    // 1 where the cell holds an observation

  ObservationMap() = default;
  explicit ObservationMap(int w)
      : width(w), values(std::size_t(w) * w, 0.0), mask(std::size_t(w) * w, 0) {
    if (w <= 0 || w % 2 != 0) throw ShapeError("observation map width must be positive and even");
  }

  std::size_t size() const { return values.size(); }
  double& at(int row, int col) { return values[std::size_t(row) * width + col]; }
  double at(int row, int col) const { return values[std::size_t(row) * width + col]; }
  std::uint8_t& mask_at(int row, int col) { return mask[std::size_t(row) * width + col]; }
  std::uint8_t mask_at(int row, int col) const { return mask[std::size_t(row) * width + col]; }

  int occupied() const { return int(std::count(mask.begin(), mask.end(), std::uint8_t{1})); }
  double peak() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }

  // Dense map with every cell marked occupied.
  static ObservationMap dense(int w, std::vector<double> vals) {
    ObservationMap m(w);
    if (vals.size() != m.size()) throw ShapeError("dense map value count does not match width");
    m.values = std::move(vals);
    std::fill(m.mask.begin(), m.mask.end(), std::uint8_t{1});
    return m;
  }
};

inline void require_same_shape(const ObservationMap& a, const ObservationMap& b) {
  if (a.width != b.width || a.values.size() != b.values.size() || a.mask.size() != b.mask.size()) {
    throw ShapeError("observation map shapes differ: " + std::to_string(a.width) + " vs " +
                     std::to_string(b.width));
  }
}

struct Observation {
  UnitVector3 light;
  double irradiance = 0.0;
};

// All observations of one surface point, plus its normal when known.
struct PixelSamples {
  std::vector<Observation> observations;
  std::optional<UnitVector3> normal;
};

struct GridCell {
  int row = 0;
  int col = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

inline GridCell project_light(const UnitVector3& l, int w) {
  if (l.z() < 0.0) throw HemisphereError("light below the horizon cannot be projected");
  auto bin = [w](double t) {
    const double cell = std::floor(w * (t + 1.0) / 2.0);
    return int(std::clamp(cell, 0.0, double(w - 1)));
  };
  return {bin(l.y()), bin(l.x())};
}

// Scatter samples into a w x w grid. Cells hit by several samples hold their
// mean; everything is divided by the largest irradiance among the samples.
inline ObservationMap build_observation_map(const PixelSamples& samples, int w = kDefaultMapWidth) {
  if (samples.observations.empty()) throw DegenerateSamplesError("no samples");
  double peak = 0.0;
  for (const auto& o : samples.observations) {
    if (!std::isfinite(o.irradiance) || o.irradiance < 0.0) {
      throw DegenerateSamplesError("irradiance must be finite and nonnegative");
    }
    peak = std::max(peak, o.irradiance);
  }
  if (!(peak > 0.0)) throw DegenerateSamplesError("all samples have zero irradiance");

  ObservationMap map(w);
  std::vector<int> hits(map.size(), 0);
  for (const auto& o : samples.observations) {
    const GridCell c = project_light(o.light, w);
    const std::size_t i = std::size_t(c.row) * w + c.col;
    map.values[i] += o.irradiance;
    ++hits[i];
  }
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (hits[i] == 0) continue;
    map.values[i] = map.values[i] / hits[i] / peak;
    map.mask[i] = 1;
  }
  return map;
}

// Unit 2D direction of the line an isotropic map is symmetric about.
struct Axis2 {
  double x = 1.0;
  double y = 0.0;
};

inline Axis2 axis_from_normal(const UnitVector3& n) {
  const double len = std::hypot(n.x(), n.y());
  if (len <= 1e-6) return {1.0, 0.0};
  return {n.x() / len, n.y() / len};
}

// Jacobian of axis_from_normal with respect to (n.x, n.y); zero in the
// degenerate branch.
inline std::array<double, 4> axis_jacobian(const UnitVector3& n) {
  const double len = std::hypot(n.x(), n.y());
  if (len <= 1e-6) return {0.0, 0.0, 0.0, 0.0};
  const Axis2 a = axis_from_normal(n);
  return {(1.0 - a.x * a.x) / len, -a.x * a.y / len, -a.x * a.y / len, (1.0 - a.y * a.y) / len};
}

// Reflection of a w x w grid about the line through its center along `axis`.
// Each output cell reads the reflected position of its center with bilinear
// interpolation; reads outside the grid are zero. The operator is linear in
// the grid, so it also provides its transpose and its derivative with
// respect to the axis.
template <typename T>
class MirrorOperator {
 public:
  struct Tap {
    int index;
    T weight;
  };

  MirrorOperator(int width, T axis_x, T axis_y) : width_(width), ax_(axis_x), ay_(axis_y) {
    const std::size_t n = std::size_t(width) * width;
    src_.resize(n);
    taps_.resize(n);
    tap_count_.assign(n, 0);
    const T half = T(width) / 2;
    for (int r = 0; r < width; ++r) {
      for (int c = 0; c < width; ++c) {
        const T px = T(c) + T(0.5) - half;
        const T py = T(r) + T(0.5) - half;
        const T proj = px * ax_ + py * ay_;
        const T qx = 2 * proj * ax_ - px;
        const T qy = 2 * proj * ay_ - py;
        const std::size_t k = std::size_t(r) * width + c;
        src_[k] = {snap(qy + half - T(0.5)), snap(qx + half - T(0.5))};
        build_taps(k);
      }
    }
  }

  MirrorOperator(int width, const Axis2& axis) : MirrorOperator(width, T(axis.x), T(axis.y)) {}

  int width() const { return width_; }
  std::span<const Tap> taps(std::size_t k) const { return {taps_[k].data(), tap_count_[k]}; }

  void apply(std::span<const T> in, std::span<T> out) const {
    for (std::size_t k = 0; k < taps_.size(); ++k) {
      T acc = 0;
      for (const Tap& t : taps(k)) acc += t.weight * in[t.index];
      out[k] = acc;
    }
  }

  std::vector<T> apply(std::span<const T> in) const {
    std::vector<T> out(in.size());
    apply(in, out);
    return out;
  }

  // grad_in += M^T grad_out
  void apply_transpose(std::span<const T> grad_out, std::span<T> grad_in) const {
    for (std::size_t k = 0; k < taps_.size(); ++k) {
      for (const Tap& t : taps(k)) grad_in[t.index] += t.weight * grad_out[k];
    }
  }

  // sum_k grad_out[k] * d(out[k]) / d(axis), for out = M(axis) in.
  std::array<T, 2> axis_gradient(std::span<const T> in, std::span<const T> grad_out) const {
    const T half = T(width_) / 2;
    std::array<T, 2> g{0, 0};
    for (int r = 0; r < width_; ++r) {
      for (int c = 0; c < width_; ++c) {
        const std::size_t k = std::size_t(r) * width_ + c;
        if (grad_out[k] == 0) continue;
        const auto [sr, sc] = src_[k];
        const T r0 = std::floor(sr), c0 = std::floor(sc);
        const T fy = sr - r0, fx = sc - c0;
        const int ir = int(r0), ic = int(c0);
        const T v00 = fetch(in, ir, ic), v01 = fetch(in, ir, ic + 1);
        const T v10 = fetch(in, ir + 1, ic), v11 = fetch(in, ir + 1, ic + 1);
        const T d_col = (1 - fy) * (v01 - v00) + fy * (v11 - v10);
        const T d_row = (1 - fx) * (v10 - v00) + fx * (v11 - v01);
        // q = 2 (p.a) a - p, so dq/da = 2 [ (p.a) I + a p^T ].
        const T px = T(c) + T(0.5) - half;
        const T py = T(r) + T(0.5) - half;
        const T proj = px * ax_ + py * ay_;
        const T dqx_dax = 2 * (proj + ax_ * px), dqx_day = 2 * ax_ * py;
        const T dqy_dax = 2 * ay_ * px, dqy_day = 2 * (proj + ay_ * py);
        g[0] += grad_out[k] * (d_col * dqx_dax + d_row * dqy_dax);
        g[1] += grad_out[k] * (d_col * dqx_day + d_row * dqy_day);
      }
    }
    return g;
  }

  // Nearest-neighbour source cell, or -1 when the reflection leaves the grid.
  int nearest_source(std::size_t k) const {
    const long r = std::lround(static_cast<double>(src_[k][0]));
    const long c = std::lround(static_cast<double>(src_[k][1]));
    if (r < 0 || c < 0 || r >= width_ || c >= width_) return -1;
    return int(r * width_ + c);
  }

 private:
  // Diagonal axes land on cell centers up to rounding; snapping keeps those
  // reflections exact permutations.
  static T snap(T v) {
    const T r = std::round(v);
    return std::abs(v - r) < T(1e-9) ? r : v;
  }

  T fetch(std::span<const T> in, int r, int c) const {
    if (r < 0 || c < 0 || r >= width_ || c >= width_) return 0;
    return in[std::size_t(r) * width_ + c];
  }

  void build_taps(std::size_t k) {
    const auto [sr, sc] = src_[k];
    const T r0 = std::floor(sr), c0 = std::floor(sc);
    const T fy = sr - r0, fx = sc - c0;
    const int ir = int(r0), ic = int(c0);
    auto add = [&](int r, int c, T w) {
      if (w == 0 || r < 0 || c < 0 || r >= width_ || c >= width_) return;
      taps_[k][tap_count_[k]++] = {r * width_ + c, w};
    };
    add(ir, ic, (1 - fy) * (1 - fx));
    add(ir, ic + 1, (1 - fy) * fx);
    add(ir + 1, ic, fy * (1 - fx));
    add(ir + 1, ic + 1, fy * fx);
  }

  int width_;
  T ax_, ay_;
  std::vector<std::array<T, 2>> src_;  // (row, col) read position per output cell
  std::vector<std::array<Tap, 4>> taps_;
  std::vector<std::size_t> tap_count_;
};

inline ObservationMap mirror(const ObservationMap& d, const UnitVector3& n) {
  const MirrorOperator<double> op(d.width, axis_from_normal(n));
  ObservationMap out(d.width);
  op.apply(d.values, out.values);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const int src = op.nearest_source(k);
    out.mask[k] = src < 0 ? 0 : d.mask[std::size_t(src)];
  }
  return out;
}

// Stride-2 2x2 mean over a flat grid of even width. The block is summed in
// sorted order so a mirrored block pools to the bit-identical value.
template <typename T>
std::vector<T> avg_pool_values(std::span<const T> in, int w) {
  const int h = w / 2;
  std::vector<T> out(std::size_t(h) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < h; ++c) {
      const std::size_t a = std::size_t(2 * r) * w + 2 * c;
      std::array<T, 4> v{in[a], in[a + 1], in[a + w], in[a + w + 1]};
      std::sort(v.begin(), v.end());
      out[std::size_t(r) * h + c] = ((v[0] + v[1]) + (v[2] + v[3])) / 4;
    }
  }
  return out;
}

inline ObservationMap avg_pool(const ObservationMap& d) {
  if (d.width % 2 != 0) throw ShapeError("avg_pool needs an even width");
  const int w = d.width, h = w / 2;
  // Built field by field: the pooled width may be odd (e.g. 2 -> 1).
  ObservationMap out;
  out.width = h;
  out.values = avg_pool_values<double>(d.values, w);
  out.mask.assign(std::size_t(h) * h, 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < h; ++c) {
      const std::size_t a = std::size_t(2 * r) * w + 2 * c;
      out.mask[std::size_t(r) * h + c] =
          (d.mask[a] | d.mask[a + 1] | d.mask[a + w] | d.mask[a + w + 1]) ? 1 : 0;
    }
  }
  return out;
}

// 8-bit grayscale export, values scaled by 255.
inline void write_map_pgm(const ObservationMap& d, const std::string& path) {
  std::vector<std::uint8_t> px(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) px[i] = quantize_u8(d.values[i], 255.0);
  write_pgm(d.width, d.width, px, path);
}

// Binary record: "OBSM", u32 width, w^2 float32 values, w^2 mask bytes.
inline void write_map_record(std::ostream& out, const ObservationMap& d) {
  out.write("OBSM", 4);
  detail::put_u32(out, std::uint32_t(d.width));
  for (double v : d.values) detail::put_f32(out, float(v));
  out.write(reinterpret_cast<const char*>(d.mask.data()), std::streamsize(d.mask.size()));
}

inline ObservationMap read_map_record(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "OBSM") throw IoError("missing OBSM magic");
  const std::uint32_t w = detail::get_u32(in);
  if (w == 0 || w > 4096) throw IoError("implausible OBSM width " + std::to_string(w));
  ObservationMap d;
  d.width = int(w);
  d.values.resize(std::size_t(w) * w);
  d.mask.resize(std::size_t(w) * w);
  for (double& v : d.values) v = detail::get_f32(in);
  if (!in.read(reinterpret_cast<char*>(d.mask.data()), std::streamsize(d.mask.size()))) {
    throw IoError("truncated OBSM mask");
  }
  return d;
}

inline void write_map_file(const ObservationMap& d, const std::string& path) {
  auto out = detail::open_out(path);
  write_map_record(out, d);
  if (!out) throw IoError("write failed: " + path);
}

inline ObservationMap read_map_file(const std::string& path) {
  auto in = detail::open_in(path);
  return read_map_record(in);
}

}  // namespace sparseps
