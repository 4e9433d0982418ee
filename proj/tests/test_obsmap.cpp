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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "sparseps/obsmap.hpp"

namespace sparseps {
namespace {

ObservationMap random_dense(int w, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(std::size_t(w) * w);
  for (double& x : v) x = u(rng);
  return ObservationMap::dense(w, std::move(v));
}

double total(const ObservationMap& d) { return std::accumulate(d.values.begin(), d.values.end(), 0.0); }

TEST(ProjectLight, KnownCells) {
  EXPECT_EQ(project_light(UnitVector3(), 32), (GridCell{16, 16}));
  EXPECT_EQ(project_light(normalize({0.999, 0, 0.045}), 32), (GridCell{16, 31}));
  EXPECT_EQ(project_light(UnitVector3::from_unit(0.5, -0.5, std::sqrt(0.5)), 32), (GridCell{8, 24}));
  EXPECT_THROW(project_light(normalize({0, 0.2, -1}), 32), HemisphereError);
}

TEST(ProjectLight, TotalOnClosedHemisphere) {
  Rng rng(1);
  for (const auto& l : sample_hemisphere_lights(5000, 90.0, rng)) {
    const GridCell c = project_light(l, 32);
    EXPECT_TRUE(c.row >= 0 && c.row < 32 && c.col >= 0 && c.col < 32);
  }
  for (const Vec3 v : {Vec3{1, 0, 0}, Vec3{-1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, -1, 0}}) {
    const GridCell c = project_light(normalize(v), 32);
    EXPECT_TRUE(c.row >= 0 && c.row < 32 && c.col >= 0 && c.col < 32);
  }
}

TEST(BuildMap, SingleSampleIsUnitPeak) {
  PixelSamples s;
  s.observations.push_back({UnitVector3(), 0.5});
  const ObservationMap m = build_observation_map(s, 32);
  EXPECT_EQ(m.at(16, 16), 1.0);
  EXPECT_EQ(m.occupied(), 1);
  EXPECT_EQ(total(m), 1.0);
}

TEST(BuildMap, CollisionsAreAveragedThenNormalized) {
  PixelSamples s;
  s.observations.push_back({normalize({0.01, 0.0, 1.0}), 0.2});
  s.observations.push_back({normalize({0.02, 0.0, 1.0}), 0.6});
  const ObservationMap m = build_observation_map(s, 32);
  EXPECT_EQ(m.occupied(), 1);
  EXPECT_NEAR(m.at(16, 16), 0.6667, 1e-4);
}

TEST(BuildMap, PeakIsOneWithoutCollisions) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int t = 0; t < 50; ++t) {
    PixelSamples s;
    for (const auto& l : sample_hemisphere_lights(10, 75.0, rng)) s.observations.push_back({l, u(rng)});
    const ObservationMap m = build_observation_map(s, 32);
    if (m.occupied() == 10) {
      EXPECT_EQ(m.peak(), 1.0);
    } else {
      EXPECT_LE(m.peak(), 1.0);
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (!m.mask[k]) {
        EXPECT_EQ(m.values[k], 0.0);
      }
      EXPECT_GE(m.values[k], 0.0);
    }
  }
}

TEST(BuildMap, ThousandLightsLeaveHoles) {
  Rng rng(3);
  PixelSamples s;
  for (const auto& l : sample_hemisphere_lights(1000, 90.0, rng)) s.observations.push_back({l, 1.0});
  EXPECT_LT(build_observation_map(s, 32).occupied(), 1024);
}

TEST(BuildMap, RejectsDegenerateInput) {
  PixelSamples empty;
  EXPECT_THROW(build_observation_map(empty, 32), DegenerateSamplesError);
  PixelSamples dark;
  dark.observations.push_back({UnitVector3(), 0.0});
  EXPECT_THROW(build_observation_map(dark, 32), DegenerateSamplesError);
  EXPECT_THROW(ObservationMap(7), ShapeError);
}

TEST(Axis, FromNormal) {
  const Axis2 a = axis_from_normal(UnitVector3::from_unit(0, 1, 0));
  EXPECT_EQ(a.x, 0.0);
  EXPECT_EQ(a.y, 1.0);
  const Axis2 b = axis_from_normal(UnitVector3());
  EXPECT_EQ(b.x, 1.0);
  EXPECT_EQ(b.y, 0.0);
  const Axis2 c = axis_from_normal(normalize({0.6, 0.6, 0.529}));
  EXPECT_NEAR(c.x, 0.7071, 1e-4);
  EXPECT_NEAR(c.y, 0.7071, 1e-4);
}

TEST(Axis, JacobianMatchesFiniteDifferences) {
  const UnitVector3 n = normalize({0.3, -0.5, 0.8});
  const auto j = axis_jacobian(n);
  const double h = 1e-7;
  auto axis_at = [&](double dx, double dy) {
    // axis_from_normal only reads the in-plane components.
    const double x = n.x() + dx, y = n.y() + dy, len = std::hypot(x, y);
    return std::array<double, 2>{x / len, y / len};
  };
  const auto px = axis_at(h, 0), mx = axis_at(-h, 0), py = axis_at(0, h), my = axis_at(0, -h);
  EXPECT_NEAR(j[0], (px[0] - mx[0]) / (2 * h), 1e-7);
  EXPECT_NEAR(j[1], (py[0] - my[0]) / (2 * h), 1e-7);
  EXPECT_NEAR(j[2], (px[1] - mx[1]) / (2 * h), 1e-7);
  EXPECT_NEAR(j[3], (py[1] - my[1]) / (2 * h), 1e-7);
}

TEST(Mirror, VerticalAxisFlipsColumns) {
  Rng rng(4);
  const ObservationMap d = random_dense(8, rng);
  const ObservationMap m = mirror(d, UnitVector3::from_unit(0, 1, 0));
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) EXPECT_EQ(m.at(r, c), d.at(r, 7 - c));
  }
}

TEST(Mirror, DegenerateAxisFlipsRows) {
  Rng rng(5);
  const ObservationMap d = random_dense(8, rng);
  const ObservationMap m = mirror(d, UnitVector3());
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) EXPECT_EQ(m.at(r, c), d.at(7 - r, c));
  }
}

TEST(Mirror, AxisAlignedIsExactInvolution) {
  Rng rng(6);
  for (const UnitVector3 n : {UnitVector3::from_unit(0, 1, 0), UnitVector3::from_unit(1, 0, 0)}) {
    for (int t = 0; t < 100; ++t) {
      ObservationMap d = random_dense(32, rng);
      for (std::size_t k = 0; k < d.size(); k += 3) d.mask[k] = 0;
      const ObservationMap twice = mirror(mirror(d, n), n);
      EXPECT_EQ(twice.values, d.values);
      EXPECT_EQ(twice.mask, d.mask);
    }
  }
}

TEST(Mirror, PreservesMassOfSmoothMaps) {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const double x0 = 4 * u(rng), y0 = 4 * u(rng), s = 3.0 + u(rng);
    std::vector<double> v(32 * 32);
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 32; ++c) {
        const double x = c + 0.5 - 16 - x0, y = r + 0.5 - 16 - y0;
        v[std::size_t(r) * 32 + c] = std::exp(-(x * x + y * y) / (2 * s * s));
      }
    }
    const ObservationMap d = ObservationMap::dense(32, v);
    const UnitVector3 n = normalize({u(rng), u(rng), 0.5});
    EXPECT_NEAR(total(mirror(d, n)), total(d), 0.01 * total(d));
  }
}

TEST(Mirror, TransposeIsAdjoint) {
  Rng rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const MirrorOperator<double> op(16, axis_from_normal(normalize({0.3, 0.7, 0.4})));
  std::vector<double> x(256), y(256), mx(256), mty(256, 0.0);
  for (auto& v : x) v = u(rng);
  for (auto& v : y) v = u(rng);
  op.apply(x, mx);
  op.apply_transpose(y, mty);
  EXPECT_NEAR(std::inner_product(mx.begin(), mx.end(), y.begin(), 0.0),
              std::inner_product(x.begin(), x.end(), mty.begin(), 0.0), 1e-12);
}

TEST(AvgPool, Examples) {
  const ObservationMap c = ObservationMap::dense(32, std::vector<double>(1024, 0.3));
  const ObservationMap p = avg_pool(c);
  EXPECT_EQ(p.width, 16);
  for (double v : p.values) EXPECT_NEAR(v, 0.3, 1e-15);

  ObservationMap block(2);
  block.values = {0.0, 0.4, 0.8, 1.0};
  block.mask = {0, 1, 0, 0};
  const ObservationMap q = avg_pool(block);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_NEAR(q.values[0], 0.55, 1e-15);
  EXPECT_EQ(q.mask[0], 1);
}

TEST(MapRecord, FileRoundTrip) {
  Rng rng(9);
  ObservationMap d = random_dense(8, rng);
  d.mask[3] = 0;
  const auto path = (std::filesystem::temp_directory_path() / "sparseps_map.obsm").string();
  write_map_file(d, path);
  const ObservationMap back = read_map_file(path);
  EXPECT_EQ(back.width, 8);
  EXPECT_EQ(back.mask, d.mask);
  for (std::size_t k = 0; k < d.size(); ++k) EXPECT_EQ(back.values[k], double(float(d.values[k])));
  std::ofstream(path, std::ios::binary) << "XXXX";
  EXPECT_THROW(read_map_file(path), IoError);
}

TEST(MapPgm, ScalesBy255) {
  ObservationMap d(2);
  d.values = {0.0, 0.5, 1.0, 0.25};
  const auto path = (std::filesystem::temp_directory_path() / "sparseps_map.pgm").string();
  write_map_pgm(d, path);
  EXPECT_EQ(read_pgm(path).pixels, (std::vector<std::uint8_t>{0, 128, 255, 64}));
}

}  // namespace
}  // namespace sparseps
