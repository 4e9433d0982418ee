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

#include "sparseps/solvers.hpp"

namespace sparseps {
namespace {

UnitVector3 random_normal(Rng& rng, double min_z = 0.1) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const UnitVector3 n = normalize({g(rng), g(rng), std::abs(g(rng))});
    if (n.z() >= min_z) return n;
  }
}

// Lights within 45 degrees of the normal's side of the hemisphere so no
// sample is in attached shadow.
std::vector<UnitVector3> lights_facing(const UnitVector3& n, int count, Rng& rng) {
  std::vector<UnitVector3> out;
  while (int(out.size()) < count) {
    for (const auto& l : sample_hemisphere_lights(1, 80.0, rng)) {
      if (l.dot(n) > 0.2) out.push_back(l);
    }
  }
  return out;
}

std::vector<double> lambertian(const UnitVector3& n, const std::vector<UnitVector3>& lights, double albedo) {
  std::vector<double> irr;
  for (const auto& l : lights) irr.push_back(shade(n, l, kViewDirection, Lambertian{albedo}));
  return irr;
}

TEST(LsNormal, IdentityLights) {
  const UnitVector3 n = normalize({0.3, 0.5, 0.8});
  const std::vector<UnitVector3> axes{UnitVector3::from_unit(1, 0, 0), UnitVector3::from_unit(0, 1, 0), UnitVector3()};
  const LsResult r = ls_normal(axes, std::vector<double>{n.x(), n.y(), n.z()});
  EXPECT_LT((r.normal.vec() - n.vec()).norm(), 1e-10);
  EXPECT_NEAR(r.albedo, 1.0, 1e-12);
}

TEST(LsNormal, ExactOnShadowFreeLambertianData) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const UnitVector3 n = random_normal(rng);
    const auto lights = lights_facing(n, 10, rng);
    const LsResult r = ls_normal(lights, lambertian(n, lights, 0.7));
    EXPECT_LT((r.normal.vec() - n.vec()).norm(), 1e-8);
    EXPECT_NEAR(r.albedo, 0.7, 1e-8);
  }
}

TEST(LsNormal, ScaleInvariant) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const auto lights = sample_hemisphere_lights(10, 75.0, rng);
    std::vector<double> irr(10), scaled(10);
    const double k = 0.1 + 10.0 * u(rng);
    for (int i = 0; i < 10; ++i) {
      irr[i] = u(rng);
      scaled[i] = k * irr[i];
    }
    const LsResult a = ls_normal(lights, irr), b = ls_normal(lights, scaled);
    EXPECT_LT((a.normal.vec() - b.normal.vec()).norm(), 1e-12);
    EXPECT_NEAR(b.albedo, k * a.albedo, 1e-9 * b.albedo);
  }
}

TEST(LsNormal, Degenerate) {
  const std::vector<UnitVector3> coplanar{normalize({1, 0, 1}), normalize({-1, 0, 1}), normalize({0.3, 0, 1})};
  EXPECT_THROW(ls_normal(coplanar, std::vector<double>{0.5, 0.5, 0.5}), DegenerateLightingError);
  const std::vector<UnitVector3> two{UnitVector3(), normalize({1, 0, 1})};
  EXPECT_THROW(ls_normal(two, std::vector<double>{0.5, 0.5}), DegenerateLightingError);
  Rng rng(3);
  const auto lights = sample_hemisphere_lights(5, 60.0, rng);
  EXPECT_THROW(ls_normal(lights, std::vector<double>(5, 0.0)), NormalizationError);
}

TEST(LsNormal, FromDenseLambertianMap) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const UnitVector3 n = random_normal(rng, 0.3);
    const ObservationMap d = make_dense_gt_map(n, Lambertian{0.9}, 1000, 32);
    EXPECT_LT(angular_error_deg(ls_normal_from_map(d).normal, n), 2.0);
  }
}

TEST(SymmetryInpaint, DenseInputUnchanged) {
  Rng rng(5);
  const ObservationMap d = make_dense_gt_map(random_normal(rng), Lambertian{1.0}, 1000, 16);
  ObservationMap full = d;
  std::fill(full.mask.begin(), full.mask.end(), std::uint8_t{1});
  const ObservationMap out = symmetry_inpaint(full, random_normal(rng), 20);
  EXPECT_EQ(out.values, full.values);
}

TEST(SymmetryInpaint, MirrorCellReceivesKnownValue) {
  ObservationMap s(16);
  s.at(3, 5) = 0.42;
  s.mask_at(3, 5) = 1;
  const UnitVector3 n = UnitVector3::from_unit(0, 1, 0);  // mirror flips columns
  const ObservationMap out = symmetry_inpaint(s, n, 0);
  EXPECT_EQ(out.at(3, 10), 0.42);
  EXPECT_EQ(out.at(3, 5), 0.42);
  EXPECT_EQ(out.occupied(), 256);
}

TEST(SymmetryInpaint, KeepsKnownCellsAndFillsEverything) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    PixelSamples s;
    for (const auto& l : sample_hemisphere_lights(10, 75.0, rng)) s.observations.push_back({l, u(rng)});
    const ObservationMap sparse = build_observation_map(s, 32);
    for (bool mirror_step : {true, false}) {
      const ObservationMap out = symmetry_inpaint(sparse, random_normal(rng), 10, mirror_step);
      EXPECT_EQ(out.occupied(), 1024);
      for (std::size_t k = 0; k < out.size(); ++k) {
        if (sparse.mask[k]) {
          EXPECT_EQ(out.values[k], sparse.values[k]);
        }
        EXPECT_GE(out.values[k], 0.0);
        EXPECT_LE(out.values[k], 1.0);
      }
    }
  }
  EXPECT_THROW(symmetry_inpaint(ObservationMap(8), UnitVector3(), 3), DegenerateSamplesError);
}

TEST(SymmetryInpaint, MirrorStepBeatsDiffusionOnLambertianPoints) {
  Rng rng(7);
  int wins = 0;
  for (int t = 0; t < 100; ++t) {
    const UnitVector3 n = random_normal(rng, 0.3);
    PixelSamples s;
    for (const auto& l : sample_hemisphere_lights(10, 75.0, rng)) s.observations.push_back({l, shade(n, l, kViewDirection, Lambertian{0.8})});
    if (!std::any_of(s.observations.begin(), s.observations.end(), [](const Observation& o) { return o.irradiance > 0; })) {
      --t;
      continue;
    }
    const ObservationMap sparse = build_observation_map(s, 32);
    const ObservationMap gt = make_dense_gt_map(n, Lambertian{0.8}, 1000, 32);
    auto mae = [&](const ObservationMap& m) {
      double e = 0.0;
      for (std::size_t k = 0; k < m.size(); ++k) e += std::abs(m.values[k] - gt.values[k]);
      return e / double(m.size());
    };
    wins += mae(symmetry_inpaint(sparse, n, 20, true)) < mae(symmetry_inpaint(sparse, n, 20, false));
  }
  EXPECT_GE(wins, 80);
}

TEST(Models, LiForwardContract) {
  Rng rng(8);
  const MlpModel li = make_li_model(8, rng, {16});
  PixelSamples s;
  for (const auto& l : sample_hemisphere_lights(10, 75.0, rng)) s.observations.push_back({l, l.z()});
  const ObservationMap sparse = build_observation_map(s, 8);
  const ObservationMap d = li_forward(li, sparse);
  EXPECT_EQ(d.width, 8);
  EXPECT_EQ(d.occupied(), 64);
  for (double v : d.values) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(li_forward(li, sparse).values, d.values);
  EXPECT_THROW(li_forward(li, ObservationMap(4)), ShapeError);

  MlpModel flat = li;
  for (auto& l : flat.layers()) l.weight.setZero();
  flat.layers().back().bias.setConstant(0.7);
  for (double v : li_forward(flat, sparse).values) EXPECT_DOUBLE_EQ(v, 1.0 / (1.0 + std::exp(-0.7)));
}

TEST(Models, NeForwardContract) {
  Rng rng(9);
  const MlpModel li = make_li_model(8, rng, {16});
  const MlpModel ne = make_ne_model(8, rng, {16});
  for (int t = 0; t < 50; ++t) {
    PixelSamples s;
    for (const auto& l : sample_hemisphere_lights(10, 75.0, rng)) s.observations.push_back({l, 0.1 + l.z()});
    const ObservationMap sparse = build_observation_map(s, 8);
    const UnitVector3 n = ne_forward(ne, sparse, li_forward(li, sparse));
    EXPECT_NEAR(n.vec().norm(), 1.0, 1e-12);
    EXPECT_GE(n.z(), 0.0);
    // Sample order does not matter to a fixed model.
    PixelSamples shuffled = s;
    std::reverse(shuffled.observations.begin(), shuffled.observations.end());
    const InferResult r = infer(li, ne, shuffled, 8);
    EXPECT_EQ(r.normal, n);
    EXPECT_EQ(r.dense.occupied(), 64);
  }
  MlpModel zero = ne;
  for (auto& l : zero.layers()) {
    l.weight.setZero();
    l.bias.setZero();
  }
  const ObservationMap m = ObservationMap::dense(8, std::vector<double>(64, 0.5));
  EXPECT_THROW(ne_forward(zero, m, m), NormalizationError);
}

// Finite-difference check of every parameter gradient of an objective.
template <typename Objective>
double worst_relative_error(MlpModel& model, const Objective& objective) {
  const ObjectiveResult r = objective();
  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < model.parameter_count(); ++i) {
    double& p = model.parameter(i);
    const double o = p;
    p = o + h;
    const double up = objective().loss;
    p = o - h;
    const double down = objective().loss;
    p = o;
    const double fd = (up - down) / (2 * h);
    // A parameter with no influence (dead unit) has true gradient 0 while
    // its difference quotient reads the loss rounding, eps |L| / h ~ 1e-10;
    // the floor keeps such parameters from counting as relative errors.
    worst = std::max(worst, std::abs(MlpModel::gradient_at(r.grads, i) - fd) / std::max(std::abs(fd), 1e-6));
  }
  return worst;
}

struct Miniature {
  Minibatch batch;
  MlpModel li, ne;
};

// Small sphere batch plus models with `hidden` units. Seeds are skipped
// while some example would leave every interpolation hidden unit inactive:
// its map output is then exactly constant, its symmetry residuals sit at
// rounding level, and the L1 kink makes finite differences meaningless.
Miniature make_miniature(int w, int hidden, unsigned seed) {
  Rng rng(seed);
  TrainingSetConfig tc;
  tc.points = 6;
  tc.map_width = w;
  tc.dense_lights = 200;
  const auto data = make_sphere_training_set(tc, rng);
  std::vector<ObservationMap> sparse, gt;
  std::vector<UnitVector3> normals;
  for (const auto& e : data) {
    sparse.push_back(draw_sparse_map(e.samples, 10, w, rng));
    gt.push_back(e.d_gt);
    normals.push_back(e.normal);
  }
  Miniature m{make_minibatch(sparse, gt, normals), {}, {}};
  for (;;) {
    m.li = make_li_model(w, rng, {hidden});
    m.ne = make_ne_model(w, rng, {hidden});
    const Eigen::MatrixXd d = m.li.forward(m.batch.sparse);
    bool varied = true;
    for (Eigen::Index j = 0; j < d.cols(); ++j) varied = varied && d.col(j).maxCoeff() - d.col(j).minCoeff() > 1e-6;
    if (varied) return m;
  }
}

TEST(Objectives, NormalModelGradientOnFourByFourMaps) {
  Miniature m = make_miniature(4, 8, 10);
  const LossWeights lw;
  EXPECT_LE(worst_relative_error(m.ne, [&] { return ne_objective(m.li, m.ne, m.batch, lw); }), 1e-3);
}

TEST(Objectives, FullPipelineGradientsOnMiniature) {
  Miniature m = make_miniature(8, 6, 11);
  const LossWeights lw;
  EXPECT_LE(worst_relative_error(m.ne, [&] { return ne_objective(m.li, m.ne, m.batch, lw); }), 1e-3);
  EXPECT_LE(worst_relative_error(m.li, [&] { return li_objective(m.li, m.ne, m.batch, lw); }), 1e-3);
}

TEST(Objectives, NormalObjectiveMatchesTotalLoss) {
  Miniature m = make_miniature(8, 4, 12);
  const LossWeights lw;
  const ObjectiveResult r = ne_objective(m.li, m.ne, m.batch, lw);
  const Eigen::MatrixXd d = m.li.forward(m.batch.sparse);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < m.batch.size(); ++j) {
    ObservationMap s(8), gt(8);
    for (Eigen::Index k = 0; k < 64; ++k) {
      s.values[std::size_t(k)] = m.batch.sparse(k, j);
      s.mask[std::size_t(k)] = m.batch.sparse(64 + k, j) > 0.5;
      gt.values[std::size_t(k)] = m.batch.d_gt(k, j);
    }
    const ObservationMap dense = ObservationMap::dense(8, std::vector<double>(d.col(j).data(), d.col(j).data() + 64));
    sum += ne_total_loss(ne_forward(m.ne, s, dense), m.batch.normals[std::size_t(j)], gt, lw);
  }
  EXPECT_NEAR(r.loss, sum / double(m.batch.size()), 1e-12);
}

TrainConfig tiny_config(int w) {
  TrainConfig cfg;
  cfg.map_width = w;
  cfg.li_hidden = {16};
  cfg.ne_hidden = {16};
  cfg.batch_size = 8;
  cfg.epochs = 3;
  cfg.seed = 4;
  return cfg;
}

std::vector<TrainingExample> tiny_dataset(int points, int w, unsigned seed) {
  Rng rng(seed);
  TrainingSetConfig tc;
  tc.points = points;
  tc.map_width = w;
  tc.dense_lights = 200;
  return make_sphere_training_set(tc, rng);
}

TEST(Training, ScheduleIsFiveToOne) {
  const auto data = tiny_dataset(100, 8, 1);
  const TrainResult r = train_alternating(data, tiny_config(8));
  long ne = 0, li = 0;
  int since_li = 0;
  for (UpdateKind k : r.schedule) {
    if (k == UpdateKind::kNe) {
      ++ne;
      ++since_li;
    } else {
      ++li;
      EXPECT_EQ(since_li, 5);
      since_li = 0;
    }
  }
  EXPECT_EQ(ne, 3 * 13);  // ceil(100 / 8) batches per epoch
  EXPECT_LE(ne - 5 * li, 4);
  EXPECT_GE(ne - 5 * li, 0);
  ASSERT_EQ(r.epochs.size(), 3u);
}

TEST(Training, SameSeedSameModels) {
  const auto data = tiny_dataset(40, 8, 2);
  const TrainResult a = train_alternating(data, tiny_config(8));
  const TrainResult b = train_alternating(data, tiny_config(8));
  EXPECT_TRUE(a.li == b.li);
  EXPECT_TRUE(a.ne == b.ne);
  TrainConfig other = tiny_config(8);
  other.seed = 5;
  EXPECT_FALSE(train_alternating(data, other).ne == a.ne);
}

TEST(Training, NormalLossDecreasesOnLambertianSphere) {
  Rng rng(3);
  std::vector<TrainingExample> data;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (data.size() < 200) {
    const double x = 2 * u(rng) - 1, y = 2 * u(rng) - 1;
    if (x * x + y * y >= 1.0) continue;
    const UnitVector3 n = normalize({x, y, std::sqrt(1 - x * x - y * y)});
    TrainingExample ex{{}, n, make_dense_gt_map(n, Lambertian{0.8}, 1000, 32)};
    ex.samples.normal = n;
    for (const auto& l : sample_hemisphere_lights(64, 75.0, rng)) ex.samples.observations.push_back({l, shade(n, l, kViewDirection, Lambertian{0.8})});
    data.push_back(std::move(ex));
  }
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e-3;
  cfg.seed = 1;
  const TrainResult r = train_alternating(data, cfg);
  EXPECT_LT(r.epochs.back().mean_ne_loss, r.epochs.front().mean_ne_loss);
}

TEST(Training, NonFiniteLossReportsStep) {
  auto data = tiny_dataset(16, 8, 3);
  data[5].d_gt.values[7] = std::numeric_limits<double>::quiet_NaN();
  try {
    train_alternating(data, tiny_config(8));
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 0);
  }
  EXPECT_THROW(train_alternating({}, tiny_config(8)), Error);
}

TEST(Training, SparseDrawsUseThePool) {
  Rng rng(4);
  PixelSamples pool;
  for (const auto& l : sample_hemisphere_lights(64, 75.0, rng)) pool.observations.push_back({l, l.z()});
  const ObservationMap m = draw_sparse_map(pool, 10, 32, rng);
  EXPECT_GE(m.occupied(), 1);
  EXPECT_LE(m.occupied(), 10);
  EXPECT_EQ(draw_sparse_map(pool, 0, 32, rng).values, build_observation_map(pool, 32).values);
}

TEST(TrainingData, PointsAreValid) {
  const auto data = tiny_dataset(50, 16, 5);
  ASSERT_EQ(data.size(), 50u);
  for (const auto& ex : data) {
    EXPECT_EQ(ex.samples.observations.size(), 64u);
    EXPECT_GE(ex.normal.z(), 0.0);
    EXPECT_EQ(ex.d_gt.width, 16);
    EXPECT_LE(ex.d_gt.peak(), 1.0);
  }
}

}  // namespace
}  // namespace sparseps
