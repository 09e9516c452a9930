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

#include <filesystem>
#include <random>
#include <string>

#include "egohand/imaging.hpp"

namespace egohand::fixtures {

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("egohand_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Strictly positive, unit-sum histogram.
inline Histogram random_histogram(std::mt19937_64& rng, double floor = 1e-4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Histogram h;
  for (int i = 0; i < kHistogramBins; ++i) h[i] = floor + u(rng) * u(rng);
  return h / h.sum();
}

inline Frame solid_frame(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Frame f = make_frame(0, width, height);
  f.pixels.col(0).setConstant(r);
  f.pixels.col(1).setConstant(g);
  f.pixels.col(2).setConstant(b);
  return f;
}

}  // namespace egohand::fixtures
