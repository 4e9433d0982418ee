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

// Synthetic ground truth: isotropic BRDFs, orthographic sphere renders,
// dense reference observation maps and cone-shaped cast-shadow outliers.

#pragma once

#include <cmath>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sparseps/errors.hpp"
#include "sparseps/geometry.hpp"
#include "sparseps/image_io.hpp"
#include "sparseps/obsmap.hpp"

namespace sparseps {

struct Lambertian {
  double albedo = 1.0;
};

struct BlinnPhong {
  double kd = 0.5;
  double ks = 0.5;
  double shininess = 20.0;
};

using BrdfSpec = std::variant<Lambertian, BlinnPhong>;

inline void validate(const BrdfSpec& brdf) {
  if (const auto* l = std::get_if<Lambertian>(&brdf)) {
    if (!(l->albedo > 0.0 && l->albedo <= 1.0)) throw Error("Lambertian albedo must lie in (0, 1]");
  } else {
    const auto& b = std::get<BlinnPhong>(brdf);
    if (!(b.kd >= 0.0 && b.ks >= 0.0 && b.shininess >= 1.0)) {
      throw Error("Blinn-Phong needs kd >= 0, ks >= 0, shininess >= 1");
    }
  }
}

// Irradiance max(n.l, 0) * rho(n.l, n.v, v.l).
inline double shade(const UnitVector3& n, const UnitVector3& l, const UnitVector3& v,
                    const BrdfSpec& brdf) {
  const double cos_nl = n.dot(l);
  if (cos_nl <= 0.0) return 0.0;
  const double rho = std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Lambertian>) {
          return m.albedo;
        } else {
          const Vec3 h = l.vec() + v.vec();
          const double hn = h.norm();
          // l = -v cannot happen for lights above the horizon; keep it finite anyway.
          const double cos_nh = hn > 0.0 ? std::max(0.0, n.vec().dot(h) / hn) : 0.0;
          return m.kd + m.ks * std::pow(cos_nh, m.shininess);
        }
      },
      brdf);
  return cos_nl * rho;
}

inline std::string brdf_name(const BrdfSpec& brdf) {
  return std::holds_alternative<Lambertian>(brdf) ? "lambertian" : "blinn-phong";
}

struct OccluderCone {
  UnitVector3 center;
  double half_angle_deg = 10.0;
};

// Zeroes every observation whose light falls inside the cone.
inline PixelSamples inject_cast_shadow(PixelSamples samples, const OccluderCone& cone) {
  if (!(cone.half_angle_deg > 0.0 && cone.half_angle_deg < 90.0)) {
    throw Error("occluder half-angle must lie in (0, 90) degrees");
  }
  const double cos_half = std::cos(cone.half_angle_deg * kDegToRad);
  for (auto& o : samples.observations) {
    if (o.light.dot(cone.center) >= cos_half) o.irradiance = 0.0;
  }
  return samples;
}

// Fixed light set for dense reference maps on a w x w grid. The count is
// spread over the cells whose centers project inside the unit disk: every
// cell gets floor(count / cells) lights and the remainder goes to cells
// picked in golden-ratio order. Within a cell the lights sit on a small
// circle around the center so their projected centroid is the cell center;
// the map then samples the irradiance at cell centers to second order.
inline std::vector<UnitVector3> dense_light_sequence(int count, int w = kDefaultMapWidth) {
  if (count < 1 || w < 2) throw Error("dense_light_sequence: need count >= 1 and w >= 2");
  const double cell = 2.0 / w;
  std::vector<std::array<double, 2>> centers;
  for (int r = 0; r < w; ++r) {
    for (int c = 0; c < w; ++c) {
      const double x = (c + 0.5) * cell - 1.0, y = (r + 0.5) * cell - 1.0;
      if (x * x + y * y < 1.0) centers.push_back({x, y});
    }
  }
  const std::size_t cells = centers.size();
  std::vector<int> per_cell(cells, int(count / cells));
  std::vector<bool> bumped(cells, false);
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t e = 0; e < count % cells; ++e) {
    auto i = std::size_t(std::fmod(double(e) * golden, 1.0) * double(cells));
    while (bumped[i]) i = (i + 1) % cells;
    bumped[i] = true;
    ++per_cell[i];
  }

  const double radius = 0.25 * cell;
  std::vector<UnitVector3> lights;
  lights.reserve(count);
  for (std::size_t i = 0; i < cells; ++i) {
    for (int j = 0; j < per_cell[i]; ++j) {
      double x = centers[i][0], y = centers[i][1];
      if (per_cell[i] > 1) {
        // Start tangentially: a lone pair then straddles its ring instead of
        // spanning the steep radial falloff.
        const double a = std::atan2(y, x) + std::numbers::pi / 2 + 2.0 * std::numbers::pi * j / per_cell[i];
        x += radius * std::cos(a);
        y += radius * std::sin(a);
      }
      const double z = std::sqrt(std::max(0.0, 1.0 - x * x - y * y));
      lights.push_back(normalize({x, y, z}));
    }
  }
  return lights;
}

inline ObservationMap make_dense_gt_map(const UnitVector3& n, const BrdfSpec& brdf,
                                        int light_count = 1000, int w = kDefaultMapWidth) {
  if (light_count < 100) throw Error("dense maps need at least 100 lights");
  PixelSamples samples;
  samples.normal = n;
  for (const auto& l : dense_light_sequence(light_count, w)) {
    samples.observations.push_back({l, shade(n, l, kViewDirection, brdf)});
  }
  return build_observation_map(samples, w);
}

struct ScenePixel {
  int row = 0;
  int col = 0;
  UnitVector3 normal;
  std::vector<double> irradiance;  // one value per scene light
};

// Per-pixel observations of one object under a shared light set.
struct Scene {
  int resolution = 0;
  BrdfSpec brdf = Lambertian{};
  std::vector<UnitVector3> lights;
  std::vector<ScenePixel> pixels;
  unsigned long long seed = 0;

  PixelSamples samples(std::size_t pixel) const {
    PixelSamples s;
    s.normal = pixels[pixel].normal;
    s.observations.reserve(lights.size());
    for (std::size_t j = 0; j < lights.size(); ++j) {
      s.observations.push_back({lights[j], pixels[pixel].irradiance[j]});
    }
    return s;
  }

  // Keeps pixels whose normal lies within max_zenith_deg of the viewer.
  Scene restricted_to_zenith(double max_zenith_deg) const {
    Scene out = *this;
    const double z_min = std::cos(max_zenith_deg * kDegToRad);
    std::erase_if(out.pixels, [z_min](const ScenePixel& p) { return p.normal.z() < z_min; });
    return out;
  }
};

inline constexpr double sphere_coordinate(int index, int resolution) {
  return (index - resolution / 2.0) / (resolution / 2.0);
}

// Orthographic unit sphere. Pixel (row, col) sits at
// x = (col - res/2) / (res/2), y = (row - res/2) / (res/2); pixels with
// x^2 + y^2 < 1 see the surface with normal (x, y, sqrt(1 - x^2 - y^2)).
inline Scene render_sphere(int resolution, const BrdfSpec& brdf, const std::vector<UnitVector3>& lights) {
  if (resolution < 8) throw Error("render_sphere: resolution must be >= 8");
  if (lights.empty()) throw Error("render_sphere: no lights");
  validate(brdf);
  Scene scene;
  scene.resolution = resolution;
  scene.brdf = brdf;
  scene.lights = lights;
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      const double x = sphere_coordinate(c, resolution);
      const double y = sphere_coordinate(r, resolution);
      const double rr = x * x + y * y;
      if (rr >= 1.0) continue;
      ScenePixel p;
      p.row = r;
      p.col = c;
      p.normal = normalize({x, y, std::sqrt(1.0 - rr)});
      p.irradiance.reserve(lights.size());
      for (const auto& l : lights) p.irradiance.push_back(shade(p.normal, l, kViewDirection, brdf));
      scene.pixels.push_back(std::move(p));
    }
  }
  return scene;
}

// Scene directory: lights.txt, img_####.pfm per light, normals.pfm, meta.txt.
inline void write_scene(const Scene& scene, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);
  write_lights(scene.lights, (root / "lights.txt").string());

  const int res = scene.resolution;
  FloatImage normals(res, res, 3);
  for (const auto& p : scene.pixels) {
    normals.at(p.row, p.col, 0) = float(p.normal.x());
    normals.at(p.row, p.col, 1) = float(p.normal.y());
    normals.at(p.row, p.col, 2) = float(p.normal.z());
  }
  write_pfm(normals, (root / "normals.pfm").string());

  for (std::size_t j = 0; j < scene.lights.size(); ++j) {
    FloatImage img(res, res, 1);
    for (const auto& p : scene.pixels) img.at(p.row, p.col) = float(p.irradiance[j]);
    char name[32];
    std::snprintf(name, sizeof(name), "img_%04zu.pfm", j);
    write_pfm(img, (root / name).string());
  }

  std::ofstream meta(root / "meta.txt");
  if (!meta) throw IoError("cannot write " + (root / "meta.txt").string());
  meta << std::setprecision(9);
  meta << "shape=sphere\n" << "brdf=" << brdf_name(scene.brdf) << '\n';
  if (const auto* l = std::get_if<Lambertian>(&scene.brdf)) {
    meta << "albedo=" << l->albedo << '\n';
  } else {
    const auto& b = std::get<BlinnPhong>(scene.brdf);
    meta << "kd=" << b.kd << "\nks=" << b.ks << "\nshininess=" << b.shininess << '\n';
  }
  meta << "res=" << res << "\nlights=" << scene.lights.size() << "\nseed=" << scene.seed << '\n';
}

inline std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

inline Scene read_scene(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::ifstream meta_in(root / "meta.txt");
  if (!meta_in) throw IoError("cannot open " + (root / "meta.txt").string());
  const auto meta = read_key_values(meta_in);
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw IoError(dir + "/meta.txt: missing key " + key);
    return it->second;
  };

  Scene scene;
  scene.resolution = std::stoi(get("res"));
  scene.seed = std::stoull(get("seed"));
  if (get("brdf") == "lambertian") {
    scene.brdf = Lambertian{std::stod(get("albedo"))};
  } else {
    scene.brdf = BlinnPhong{std::stod(get("kd")), std::stod(get("ks")), std::stod(get("shininess"))};
  }
  scene.lights = read_lights((root / "lights.txt").string());

  const FloatImage normals = read_pfm((root / "normals.pfm").string());
  if (normals.channels != 3 || normals.width != scene.resolution) {
    throw IoError(dir + "/normals.pfm: unexpected shape");
  }
  for (int r = 0; r < normals.height; ++r) {
    for (int c = 0; c < normals.width; ++c) {
      const Vec3 n{normals.at(r, c, 0), normals.at(r, c, 1), normals.at(r, c, 2)};
      if (n.norm() < 0.5) continue;  // background
      scene.pixels.push_back({r, c, normalize(n), {}});
    }
  }
  for (std::size_t j = 0; j < scene.lights.size(); ++j) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%04zu.pfm", j);
    const FloatImage img = read_pfm((root / name).string());
    if (img.width != scene.resolution || img.height != scene.resolution) {
      throw IoError(dir + "/" + name + ": unexpected shape");
    }
    for (auto& p : scene.pixels) p.irradiance.push_back(img.at(p.row, p.col));
  }
  return scene;
}

}  // namespace sparseps
