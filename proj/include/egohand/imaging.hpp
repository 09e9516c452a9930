// Copyright 2026 The egohand Authors. All Rights Reserved.
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

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace egohand {

inline constexpr int kHueBins = 8;
inline constexpr int kSaturationBins = 4;
inline constexpr int kValueBins = 4;
inline constexpr int kHistogramBins = kHueBins + kSaturationBins + kValueBins;
inline constexpr double kHistogramFloor = 1e-6;
inline constexpr int kMinFrameSide = 64;

/// Stacked H|S|V marginal histogram (8 + 4 + 4 bins), normalized over the whole vector.
template <typename Scalar>
using HistogramT = Eigen::Matrix<Scalar, kHistogramBins, 1>;
using Histogram = HistogramT<double>;

/// Raw (unnormalized) bin counts; each pixel contributes one count to each channel block.
using BinCounts = Eigen::Matrix<double, kHistogramBins, 1>;

using RgbPixels = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>;
using PixelCoord = Eigen::Vector2i;  // (x, y)

/// Binary image, rows = height, values 0 or 1.
using BinaryMask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// An 8-bit RGB frame. Pixel i is row i of `pixels`, stored row-major (i = y*width + x).
struct Frame {
  std::int64_t index = 0;
  int width = 0;
  int height = 0;
  RgbPixels pixels;

  Eigen::Index pixel_count() const { return static_cast<Eigen::Index>(width) * height; }
  auto at(int x, int y) { return pixels.row(static_cast<Eigen::Index>(y) * width + x); }
  auto at(int x, int y) const { return pixels.row(static_cast<Eigen::Index>(y) * width + x); }
};

/// Allocates a black frame; throws ParameterError when either side is below 64 px.
Frame make_frame(std::int64_t index, int width, int height);

/// Throws ParameterError if the geometry or buffer size is inconsistent.
void validate_frame(const Frame& frame);

/// H in degrees [0, 360), S and V in [0, 1].
template <typename Scalar>
struct HsvImage {
  int width = 0;
  int height = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor> pixels;

  auto at(int x, int y) const { return pixels.row(static_cast<Eigen::Index>(y) * width + x); }
};
using HsvFrame = HsvImage<float>;

/// Standard hexcone RGB -> HSV on 8-bit channels. Achromatic pixels get H = 0.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> rgb_to_hsv_pixel(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const Scalar r = Scalar(r8) / Scalar(255);
  const Scalar g = Scalar(g8) / Scalar(255);
  const Scalar b = Scalar(b8) / Scalar(255);
  const Scalar max = std::max({r, g, b});
  const Scalar min = std::min({r, g, b});
  const Scalar chroma = max - min;
  Scalar h = 0;
  if (chroma > Scalar(0)) {
    if (max == r) {
      h = Scalar(60) * ((g - b) / chroma);
      if (h < Scalar(0)) h += Scalar(360);
    } else if (max == g) {
      h = Scalar(60) * ((b - r) / chroma) + Scalar(120);
    } else {
      h = Scalar(60) * ((r - g) / chroma) + Scalar(240);
    }
    if (h >= Scalar(360)) h -= Scalar(360);
  }
  const Scalar s = max > Scalar(0) ? chroma / max : Scalar(0);
  return {h, s, max};
}

/// Inverse of rgb_to_hsv_pixel, returning channels in [0, 255] (unrounded).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> hsv_to_rgb_pixel(Scalar h, Scalar s, Scalar v) {
  const Scalar c = v * s;
  const Scalar hp = h / Scalar(60);
  const Scalar x = c * (Scalar(1) - std::abs(std::fmod(hp, Scalar(2)) - Scalar(1)));
  Eigen::Matrix<Scalar, 3, 1> rgb;
  if (hp < 1) rgb << c, x, 0;
  else if (hp < 2) rgb << x, c, 0;
  else if (hp < 3) rgb << 0, c, x;
  else if (hp < 4) rgb << 0, x, c;
  else if (hp < 5) rgb << x, 0, c;
  else rgb << c, 0, x;
  rgb.array() += v - c;
  return rgb * Scalar(255);
}

HsvFrame rgb_to_hsv(const Frame& frame);

/// Indices of the three stacked bins (H in 0..7, S in 8..11, V in 12..15) for one HSV value.
/// Uniform widths; a value on an edge goes to the higher bin, the channel maximum to the last bin.
template <typename Scalar>
Eigen::Matrix<std::uint8_t, 3, 1> histogram_bins(Scalar h, Scalar s, Scalar v) {
  auto bin = [](Scalar x, Scalar width, int count) {
    int b = static_cast<int>(std::floor(x / width));
    return std::clamp(b, 0, count - 1);
  };
  Eigen::Matrix<std::uint8_t, 3, 1> out;
  out << static_cast<std::uint8_t>(bin(h, Scalar(360) / kHueBins, kHueBins)),
      static_cast<std::uint8_t>(kHueBins + bin(s, Scalar(1) / kSaturationBins, kSaturationBins)),
      static_cast<std::uint8_t>(kHueBins + kSaturationBins + bin(v, Scalar(1) / kValueBins, kValueBins));
  return out;
}

/// Per-pixel bin triples for a whole frame (row i = pixel i).
using BinImage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>;
BinImage compute_bin_image(const HsvFrame& hsv);

/// Normalizes raw counts over the whole 16-vector, adds `floor_mass` per bin and renormalizes.
/// Throws ParameterError for all-zero counts.
Histogram smooth_histogram(const BinCounts& counts, double floor_mass = kHistogramFloor);

/// Normalized, smoothed histogram of the given pixels. Throws ParameterError on an
/// empty set or an out-of-bounds coordinate.
Histogram region_histogram(const HsvFrame& hsv, std::span<const PixelCoord> pixels,
                           double floor_mass = kHistogramFloor);

// --- file I/O -------------------------------------------------------------

/// Frames from a directory (PNG/PPM, lexicographic filename order) or a printf-style
/// numbered pattern such as "seq/img_%04d.png". Throws InputError on missing input,
/// an empty sequence, or a dimension mismatch (naming the offending file).
std::vector<Frame> load_frame_sequence(const std::filesystem::path& source);

/// Sorted image paths the loader would read, without decoding them.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& source);

Frame read_frame(const std::filesystem::path& path, std::int64_t index);
void write_frame_png(const Frame& frame, const std::filesystem::path& path);

/// 8-bit grayscale, 0 = background, 255 = hand. Reading thresholds at 128.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path);

/// 16-bit grayscale label image (debug output).
void write_label_png(const Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& labels,
                     const std::filesystem::path& path);

}  // namespace egohand
