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

// Minimal readers and writers for the raster and binary formats the toolkit
// exchanges: PFM (float), PGM (8-bit) and little-endian scalar records.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sparseps/errors.hpp"

namespace sparseps {

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f32(std::ostream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("unexpected end of data");
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

inline float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

}  // namespace detail

// Row-major float image; row 0 is the top row.
struct FloatImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  FloatImage() = default;
  FloatImage(int w, int h, int c) : width(w), height(h), channels(c), data(std::size_t(w) * h * c) {}

  float& at(int row, int col, int ch = 0) {
    return data[(std::size_t(row) * width + col) * channels + ch];
  }
  float at(int row, int col, int ch = 0) const {
    return data[(std::size_t(row) * width + col) * channels + ch];
  }
};

// PFM stores scanlines bottom-to-top; negative scale marks little-endian.
inline void write_pfm(const FloatImage& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3) throw IoError("PFM supports 1 or 3 channels");
  auto out = detail::open_out(path);
  out << (img.channels == 3 ? "PF" : "Pf") << '\n'
      << img.width << ' ' << img.height << '\n'
      << "-1.0\n";
  for (int r = img.height - 1; r >= 0; --r) {
    for (int c = 0; c < img.width; ++c) {
      for (int ch = 0; ch < img.channels; ++ch) detail::put_f32(out, img.at(r, c, ch));
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

inline FloatImage read_pfm(const std::string& path) {
  auto in = detail::open_in(path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  if (!(in >> magic >> w >> h >> scale) || (magic != "PF" && magic != "Pf") || w <= 0 || h <= 0) {
    throw IoError(path + ": not a PFM file");
  }
  if (scale > 0.0) throw IoError(path + ": big-endian PFM is not supported");
  in.get();
  FloatImage img(w, h, magic == "PF" ? 3 : 1);
  try {
    for (int r = h - 1; r >= 0; --r) {
      for (int c = 0; c < w; ++c) {
        for (int ch = 0; ch < img.channels; ++ch) img.at(r, c, ch) = detail::get_f32(in);
      }
    }
  } catch (const IoError&) {
    throw IoError(path + ": truncated PFM data");
  }
  return img;
}

// Binary PGM (P5). `pixels` holds already-quantized 8-bit values, row-major.
inline void write_pgm(int width, int height, const std::vector<std::uint8_t>& pixels,
                      const std::string& path) {
  auto out = detail::open_out(path);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), std::streamsize(pixels.size()));
  if (!out) throw IoError("write failed: " + path);
}

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

inline GrayImage read_pgm(const std::string& path) {
  auto in = detail::open_in(path);
  std::string magic;
  GrayImage img;
  int maxval = 0;
  if (!(in >> magic >> img.width >> img.height >> maxval) || magic != "P5" || maxval != 255) {
    throw IoError(path + ": not an 8-bit binary PGM");
  }
  in.get();
  img.pixels.resize(std::size_t(img.width) * img.height);
  if (!in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()))) {
    throw IoError(path + ": truncated PGM data");
  }
  return img;
}

// value * scale rounded to the nearest level and clamped to [0, 255].
inline std::uint8_t quantize_u8(double value, double scale) {
  const double v = std::round(value * scale);
  if (!(v > 0.0)) return 0;
  return v >= 255.0 ? 255 : static_cast<std::uint8_t>(v);
}

}  // namespace sparseps
