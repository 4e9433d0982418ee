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

// Evaluation protocol: repeated trials with a few lights drawn from a dense
// pool, mean angular error, calibration-noise sweeps, outlier sensitivity,
// and the text report format.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sparseps/errors.hpp"
#include "sparseps/geometry.hpp"
#include "sparseps/image_io.hpp"
#include "sparseps/mlp.hpp"
#include "sparseps/obsmap.hpp"
#include "sparseps/render.hpp"
#include "sparseps/solvers.hpp"

namespace sparseps {

struct TrialConfig {
  int n_trials = 100;
  int n_lights = 10;
  unsigned long long seed = 0;
  double sigma_deg = 0.0;
};

// One trial as a solver sees it: the light directions it is told and, per
// scene pixel, the irradiance observed under each of them.
struct TrialInput {
  std::vector<UnitVector3> lights;
  Eigen::MatrixXd irradiance;  // pixels x lights

  PixelSamples pixel_samples(Eigen::Index pixel) const {
    PixelSamples s;
    for (std::size_t j = 0; j < lights.size(); ++j) {
      s.observations.push_back({lights[j], irradiance(pixel, Eigen::Index(j))});
    }
    return s;
  }
};

// Per-pixel normal estimates; an empty entry marks a pixel the solver could
// not handle.
struct Solver {
  std::string name;
  std::function<std::vector<std::optional<UnitVector3>>(const TrialInput&)> estimate;
};

inline Solver make_ls_solver() {
  return {"ls", [](const TrialInput& t) {
            std::vector<std::optional<UnitVector3>> out(std::size_t(t.irradiance.rows()));
            std::optional<LambertianLeastSquares> ls;
            try {
              ls.emplace(t.lights);
            } catch (const DegenerateLightingError&) {
              return out;
            }
            std::vector<double> row(t.lights.size());
            for (Eigen::Index p = 0; p < t.irradiance.rows(); ++p) {
              for (std::size_t j = 0; j < row.size(); ++j) row[j] = t.irradiance(p, Eigen::Index(j));
              try {
                out[std::size_t(p)] = ls->solve(row).normal;
              } catch (const NormalizationError&) {
              }
            }
            return out;
          }};
}

// Fills each pixel's sparse map (mirror step about the sparse LS estimate
// when use_mirror is set, diffusion otherwise) and runs LS over the lit
// cells of the filled map.
inline Solver make_inpaint_ls_solver(int w = kDefaultMapWidth, int iterations = 20, bool use_mirror = true) {
  return {use_mirror ? "inpaint-ls" : "diffusion-ls", [=](const TrialInput& t) {
            std::vector<std::optional<UnitVector3>> out(std::size_t(t.irradiance.rows()));
            for (Eigen::Index p = 0; p < t.irradiance.rows(); ++p) {
              try {
                const PixelSamples s = t.pixel_samples(p);
                const UnitVector3 hint = ls_normal(s).normal;
                const ObservationMap filled = symmetry_inpaint(build_observation_map(s, w), hint, iterations, use_mirror);
                out[std::size_t(p)] = ls_normal_from_map(filled).normal;
              } catch (const Error&) {
              }
            }
            return out;
          }};
}

inline Solver make_learned_solver(MlpModel li, MlpModel ne, int w = kDefaultMapWidth) {
  return {"learned", [li = std::move(li), ne = std::move(ne), w](const TrialInput& t) {
            std::vector<PixelSamples> points;
            points.reserve(std::size_t(t.irradiance.rows()));
            for (Eigen::Index p = 0; p < t.irradiance.rows(); ++p) points.push_back(t.pixel_samples(p));
            return infer_normals(li, ne, points, w);
          }};
}

struct EvalReport {
  std::string solver;
  TrialConfig config;
  std::vector<double> trial_errors_deg;  // per-trial mean angular error
  double mean_error_deg = 0.0;
  long excluded_pixels = 0;
  FloatImage error_map;                  // last trial, degrees
};

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

// Draws `count` distinct indices out of n.
inline std::vector<std::size_t> draw_without_replacement(std::size_t n, int count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> u(std::size_t(i), n - 1);
    std::swap(idx[std::size_t(i)], idx[u(rng)]);
  }
  idx.resize(std::size_t(count));
  return idx;
}

// Each trial draws n_lights pool lights without replacement. With
// sigma > 0 the solver is told perturbed directions while the observations
// stay those of the true lights. Light draws and noise draws come from
// separate streams, so trials see the same lights at every sigma.
inline EvalReport run_trials(const Scene& scene, const Solver& solver, const TrialConfig& cfg) {
  if (cfg.n_trials < 1 || cfg.n_lights < 3) throw Error("run_trials: need n_trials >= 1 and n_lights >= 3");
  if (std::size_t(cfg.n_lights) > scene.lights.size()) {
    throw Error("run_trials: scene has only " + std::to_string(scene.lights.size()) + " lights");
  }
  Rng light_rng(cfg.seed);
  Rng noise_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  EvalReport report;
  report.solver = solver.name;
  report.config = cfg;
  const Eigen::Index pixels = Eigen::Index(scene.pixels.size());
  for (int t = 0; t < cfg.n_trials; ++t) {
    const auto picks = draw_without_replacement(scene.lights.size(), cfg.n_lights, light_rng);
    TrialInput input;
    input.irradiance.resize(pixels, Eigen::Index(picks.size()));
    for (std::size_t j = 0; j < picks.size(); ++j) {
      input.lights.push_back(perturb_light(scene.lights[picks[j]], cfg.sigma_deg, noise_rng));
      for (Eigen::Index p = 0; p < pixels; ++p) {
        input.irradiance(p, Eigen::Index(j)) = scene.pixels[std::size_t(p)].irradiance[picks[j]];
      }
    }

    const auto normals = solver.estimate(input);
    FloatImage errors(scene.resolution, scene.resolution, 1);
    double sum = 0.0;
    long used = 0;
    for (std::size_t p = 0; p < scene.pixels.size(); ++p) {
      if (!normals[p]) {
        ++report.excluded_pixels;
        continue;
      }
      const double e = angular_error_deg(*normals[p], scene.pixels[p].normal);
      errors.at(scene.pixels[p].row, scene.pixels[p].col) = float(e);
      sum += e;
      ++used;
    }
    report.trial_errors_deg.push_back(used > 0 ? sum / double(used) : std::numeric_limits<double>::quiet_NaN());
    if (t + 1 == cfg.n_trials) report.error_map = std::move(errors);
  }
  report.mean_error_deg = mean_of(report.trial_errors_deg);
  return report;
}

inline std::vector<EvalReport> noise_sweep(const Scene& scene, const Solver& solver, const std::vector<double>& sigmas,
                                           TrialConfig cfg) {
  if (!std::is_sorted(sigmas.begin(), sigmas.end())) throw Error("noise_sweep: sigmas must be ascending");
  std::vector<EvalReport> out;
  for (double s : sigmas) {
    cfg.sigma_deg = s;
    out.push_back(run_trials(scene, solver, cfg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Outlier sensitivity

using PointSolver = std::function<std::optional<UnitVector3>(const PixelSamples&)>;

inline PointSolver make_ls_point_solver() {
  return [](const PixelSamples& s) -> std::optional<UnitVector3> {
    try {
      return ls_normal(s).normal;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
}

struct OutlierPoint {
  PixelSamples samples;  // must carry the true normal
  UnitVector3 cone_center;
};

struct OutlierRow {
  double half_angle_deg = 0.0;
  double mean_error_deg = 0.0;
  int failures = 0;
};

struct OutlierTable {
  std::vector<OutlierRow> rows;
  bool nondecreasing = true;
};

// Mean error per severity level; every point keeps its cone center across
// levels so the zeroed sets are nested. Level 0 is the clean input.
inline OutlierTable outlier_sensitivity(const std::vector<OutlierPoint>& points, const std::vector<double>& half_angles_deg,
                                        const PointSolver& solver) {
  if (half_angles_deg.size() < 2) throw Error("outlier_sensitivity: need at least two severity levels");
  if (points.empty()) throw Error("outlier_sensitivity: no points");
  OutlierTable table;
  for (double angle : half_angles_deg) {
    OutlierRow row;
    row.half_angle_deg = angle;
    double sum = 0.0;
    int used = 0;
    for (const auto& pt : points) {
      if (!pt.samples.normal) throw Error("outlier_sensitivity: point without a true normal");
      const PixelSamples input = angle > 0.0 ? inject_cast_shadow(pt.samples, {pt.cone_center, angle}) : pt.samples;
      const auto n = solver(input);
      if (!n) {
        ++row.failures;
        continue;
      }
      sum += angular_error_deg(*n, *pt.samples.normal);
      ++used;
    }
    row.mean_error_deg = used > 0 ? sum / used : std::numeric_limits<double>::quiet_NaN();
    if (!table.rows.empty() && !(row.mean_error_deg >= table.rows.back().mean_error_deg)) table.nondecreasing = false;
    table.rows.push_back(row);
  }
  return table;
}

// Random sphere points under `n_lights` random lights, each paired with a
// cone centered on one of its lit lights.
inline std::vector<OutlierPoint> make_outlier_points(int count, int n_lights, const BrdfSpec& brdf, Rng& rng,
                                                     double max_zenith_deg = 75.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<OutlierPoint> out;
  while (int(out.size()) < count) {
    const double x = 2.0 * u(rng) - 1.0, y = 2.0 * u(rng) - 1.0;
    if (x * x + y * y >= 0.8) continue;
    const UnitVector3 n = normalize({x, y, std::sqrt(1.0 - x * x - y * y)});
    OutlierPoint pt;
    pt.samples.normal = n;
    std::vector<UnitVector3> lit;
    for (const auto& l : sample_hemisphere_lights(n_lights, max_zenith_deg, rng)) {
      pt.samples.observations.push_back({l, shade(n, l, kViewDirection, brdf)});
      if (n.dot(l) > 0.0) lit.push_back(l);
    }
    if (lit.size() < 4) continue;
    std::uniform_int_distribution<std::size_t> pick(0, lit.size() - 1);
    pt.cone_center = lit[pick(rng)];
    out.push_back(std::move(pt));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report files

inline std::string report_sidecar(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  p.replace_extension();
  return p.string() + suffix;
}

// key=value header, then one per-trial error per line. Also writes
// <stem>.errmap.pfm and <stem>.errmap.pgm (45 degrees and above saturate).
inline void write_report(const EvalReport& report, const std::string& path) {
  {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << std::setprecision(6);
    out << "solver=" << report.solver << '\n'
        << "seed=" << report.config.seed << '\n'
        << "trials=" << report.config.n_trials << '\n'
        << "lights=" << report.config.n_lights << '\n'
        << "sigma=" << report.config.sigma_deg << '\n'
        << "mean_error_deg=" << report.mean_error_deg << '\n'
        << "excluded_pixels=" << report.excluded_pixels << '\n';
    for (double e : report.trial_errors_deg) out << e << '\n';
    if (!out) throw IoError("write failed: " + path);
  }
  if (report.error_map.width > 0) {
    write_pfm(report.error_map, report_sidecar(path, ".errmap.pfm"));
    std::vector<std::uint8_t> px(report.error_map.data.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize_u8(report.error_map.data[i], 255.0 / 45.0);
    write_pgm(report.error_map.width, report.error_map.height, px, report_sidecar(path, ".errmap.pgm"));
  }
}

inline EvalReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  EvalReport r;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        r.trial_errors_deg.push_back(std::stod(line));
        continue;
      }
      const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      if (key == "solver") r.solver = value;
      else if (key == "seed") r.config.seed = std::stoull(value);
      else if (key == "trials") r.config.n_trials = std::stoi(value);
      else if (key == "lights") r.config.n_lights = std::stoi(value);
      else if (key == "sigma") r.config.sigma_deg = std::stod(value);
      else if (key == "mean_error_deg") r.mean_error_deg = std::stod(value);
      else if (key == "excluded_pixels") r.excluded_pixels = std::stol(value);
    }
  } catch (const std::logic_error&) {
    throw IoError(path + ": malformed report line: " + line);
  }
  return r;
}

}  // namespace sparseps
