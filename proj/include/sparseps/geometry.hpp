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

// Unit vectors, angular metrics, light sampling and calibration noise.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sparseps/errors.hpp"

namespace sparseps {

// Generator used for every seeded operation in the toolkit.
using Rng = std::mt19937_64;

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Vec3 operator*(double s, const Vec3& a) {
    return {s * a.x, s * a.y, s * a.z};
  }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

// A direction of unit length. Only constructible through normalize() or
// from components already known to be unit length (checked to 1e-9).
class UnitVector3 {
 public:
  // (0, 0, 1): the viewing direction and the zenith light.
  constexpr UnitVector3() = default;

  static UnitVector3 from_unit(double x, double y, double z) {
    const double n2 = x * x + y * y + z * z;
    if (!std::isfinite(n2) || std::abs(n2 - 1.0) > 1e-9) {
      throw NormalizationError("vector is not unit length");
    }
    return UnitVector3(x, y, z);
  }

  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }
  const Vec3& vec() const { return v_; }

  double dot(const UnitVector3& o) const { return v_.dot(o.v_); }
  UnitVector3 operator-() const { return UnitVector3(-v_.x, -v_.y, -v_.z); }
  friend bool operator==(const UnitVector3&, const UnitVector3&) = default;

 private:
  constexpr UnitVector3(double x, double y, double z) : v_{x, y, z} {}
  friend UnitVector3 normalize(const Vec3& v);

  Vec3 v_{0.0, 0.0, 1.0};
};

inline UnitVector3 normalize(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw NormalizationError("cannot normalize a zero-length vector");
  }
  return UnitVector3(v.x / n, v.y / n, v.z / n);
}

inline constexpr UnitVector3 kViewDirection{};

inline double clamped_dot(const UnitVector3& a, const UnitVector3& b) {
  return std::clamp(a.dot(b), -1.0, 1.0);
}

// atan2 form of acos(a.b): keeps full precision near 0 and pi, where a dot
// product one ulp off 1 would otherwise read as ~1.5e-8 rad.
inline double angle_rad(const UnitVector3& a, const UnitVector3& b) {
  return std::atan2(a.vec().cross(b.vec()).norm(), a.dot(b));
}

inline double angular_error_deg(const UnitVector3& n, const UnitVector3& n_gt) {
  return angle_rad(n, n_gt) * kRadToDeg;
}

// Any unit vector orthogonal to n; together with n.cross(t) this spans the
// plane perpendicular to n.
inline UnitVector3 any_perpendicular(const UnitVector3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  return normalize(helper.cross(n.vec()));
}

// Area-uniform directions on the spherical cap z >= cos(max_zenith_deg).
inline std::vector<UnitVector3> sample_hemisphere_lights(int count, double max_zenith_deg,
                                                         Rng& rng) {
  if (count < 1 || !(max_zenith_deg > 0.0) || max_zenith_deg > 90.0) {
    throw Error("sample_hemisphere_lights: need count >= 1 and 0 < max_zenith <= 90");
  }
  const double z_min = std::max(0.0, std::cos(max_zenith_deg * kDegToRad));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<UnitVector3> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double z = z_min + (1.0 - z_min) * unit(rng);
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.push_back(normalize({r * std::cos(phi), r * std::sin(phi), z}));
  }
  return out;
}

// Rotates l about a random axis perpendicular to it by an angle drawn from
// N(0, sigma_deg^2). Results below the horizon are folded back up.
inline UnitVector3 perturb_light(const UnitVector3& l, double sigma_deg, Rng& rng) {
  if (sigma_deg < 0.0) throw Error("perturb_light: sigma must be >= 0");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double psi = 2.0 * std::numbers::pi * unit(rng);
  const double theta = sigma_deg * gauss(rng) * kDegToRad;
  if (sigma_deg == 0.0) return l;

  const UnitVector3 t1 = any_perpendicular(l);
  const Vec3 t2 = l.vec().cross(t1.vec());
  const Vec3 axis = std::cos(psi) * t1.vec() + std::sin(psi) * t2;
  // axis is perpendicular to l, so Rodrigues reduces to two terms.
  Vec3 r = std::cos(theta) * l.vec() + std::sin(theta) * axis.cross(l.vec());
  if (r.z < 0.0) r.z = -r.z;
  return normalize(r);
}

// Plain-text light list: one "x y z" triple per line, 9 significant digits.
inline void write_lights(const std::vector<UnitVector3>& lights, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << std::setprecision(9);
  for (const auto& l : lights) out << l.x() << ' ' << l.y() << ' ' << l.z() << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<UnitVector3> read_lights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<UnitVector3> lights;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    Vec3 v;
    if (!(ss >> v.x >> v.y >> v.z)) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected \"x y z\"");
    }
    // Stored values carry 9 digits, so renormalize rather than check.
    lights.push_back(normalize(v));
  }
  return lights;
}

}  // namespace sparseps
