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
#include <cstdint>
#include <filesystem>
#include <vector>

#include "egohand/config.hpp"
#include "egohand/imaging.hpp"
#include "egohand/motion.hpp"

namespace egohand {

// Camera motion of the background plane. Between frames t and t+1 the plane is rotated
// and zoomed about the frame center and then shifted by (tx, ty) plus a sinusoidal shake.
struct BackgroundMotion {
  double tx = 0.0;
  double ty = 0.0;
  double rotation_deg = 0.0;
  double zoom = 1.0;
  double shake_x = 0.0;
  double shake_y = 0.0;
  double shake_period = 40.0;
};

// A skin-toned ellipse on a Lissajous path:
//   center(t) = (cx + ax sin(2 pi fx t + phase_x), cy + ay sin(2 pi fy t + phase_y)).
// Visible for appear <= t < disappear (disappear < 0 means until the end).
struct BlobSpec {
  double cx = 320.0;
  double cy = 180.0;
  double ax = 0.0;
  double ay = 0.0;
  double fx = 0.0;
  double fy = 0.0;
  double phase_x = 0.0;
  double phase_y = 0.0;
  double radius = 50.0;
  double aspect = 1.0;  // vertical radius = radius * aspect
  std::int64_t appear = 0;
  std::int64_t disappear = -1;
  double hue = 20.0;  // degrees
  double saturation = 0.45;
  double value = 0.8;
  double spread = 1.0;  // texture amplitude multiplier

  Eigen::Vector2d center(std::int64_t t) const;
  bool visible(std::int64_t t) const { return t >= appear && (disappear < 0 || t < disappear); }
};

struct SceneConfig {
  int frames = 60;
  int width = 640;
  int height = 360;
  std::uint64_t seed = 0;
  double noise = 2.0;             // per-pixel Gaussian noise sigma, 8-bit units
  double texture_scale = 16.0;    // background feature size in pixels
  double speckle = 0.45;          // fraction of speckle lattice cells holding a dot
  BackgroundMotion motion;
  std::vector<BlobSpec> blobs;

  /// Throws ConfigError on bad geometry or a blob leaving the frame while visible.
  void validate() const;
};

/// Reads `frames`, `width`, `height`, `seed`, `noise`, `background.*` and `blob.<n>.*` keys.
/// Throws ConfigError on malformed values or an invalid scene.
SceneConfig scene_from_config(const KeyValueConfig& config);

/// The 200-frame 640x360 reference scene: translating background, one moving blob.
SceneConfig reference_scene(std::uint64_t seed = 7);

struct SceneTruth {
  std::vector<Homography> homographies;  // maps frame t coordinates to frame t+1, size frames-1
  std::vector<BinaryMask> masks;         // union of visible blobs per frame
  std::vector<int> visible_blobs;        // per frame
};

struct SceneSequence {
  std::vector<Frame> frames;
  std::vector<BinaryMask> masks;
};

SceneTruth planted_truth(const SceneConfig& config);

/// Mask of one blob at frame t (pixel centers inside the ellipse); empty when not visible.
BinaryMask blob_mask(const SceneConfig& config, std::size_t blob, std::int64_t t);

SceneSequence generate(const SceneConfig& config);

/// Frame t only; identical to generate(config).frames[t].
Frame render_frame(const SceneConfig& config, std::int64_t t);

/// Writes frames/frame_%06d.png and masks/frame_%06d.png under `output`.
void write_scene(const SceneSequence& scene, const std::filesystem::path& output);

}  // namespace egohand
