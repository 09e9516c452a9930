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

#include "egohand/synth.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "egohand/errors.hpp"

namespace egohand {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t lattice_hash(std::int64_t ix, std::int64_t iy, std::uint64_t salt) {
  return mix(mix(static_cast<std::uint64_t>(ix) ^ (salt << 32)) ^
             static_cast<std::uint64_t>(iy) * 0x632be59bd9b4e019ULL);
}

double unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(double x, double y, std::uint64_t salt) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double u = fade(x - fx);
  const double v = fade(y - fy);
  const double a = unit(lattice_hash(ix, iy, salt));
  const double b = unit(lattice_hash(ix + 1, iy, salt));
  const double c = unit(lattice_hash(ix, iy + 1, salt));
  const double d = unit(lattice_hash(ix + 1, iy + 1, salt));
  return (a + (b - a) * u) * (1.0 - v) + (c + (d - c) * u) * v;
}

// Fractal value noise, roughly in [0, 1] with mean 0.5.
double fbm(double x, double y, std::uint64_t salt, int octaves) {
  double sum = 0.0;
  double norm = 0.0;
  double amp = 1.0;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(x, y, salt + static_cast<std::uint64_t>(o) * 7919);
    norm += amp;
    amp *= 0.5;
    x *= 2.0;
    y *= 2.0;
  }
  return sum / norm;
}

double stretch(double n, double gain) { return std::clamp(0.5 + gain * (n - 0.5), 0.0, 1.0); }

Eigen::Vector3d hsv_to_rgb01(double h, double s, double v) {
  h = std::fmod(h, 360.0);
  if (h < 0) h += 360.0;
  return hsv_to_rgb_pixel<double>(h, std::clamp(s, 0.0, 1.0), std::clamp(v, 0.0, 1.0)) / 255.0;
}

Eigen::Vector3d background_color(const SceneConfig& cfg, double wx, double wy) {
  const std::uint64_t salt = mix(cfg.seed);
  const double u = wx / cfg.texture_scale;
  const double v = wy / cfg.texture_scale;
  const double hue = 160.0 + 110.0 * stretch(fbm(u, v, salt + 1, 2), 1.8);
  const double sat = 0.3 + 0.45 * stretch(fbm(u + 17.3, v - 5.1, salt + 2, 2), 1.8);
  double val = 0.3 + 0.55 * stretch(fbm(1.7 * u, 1.7 * v, salt + 3, 3), 1.8);

  // Speckle dots on a coarser lattice.
  const double cell = 0.5 * cfg.texture_scale;
  const auto cx = static_cast<std::int64_t>(std::floor(wx / cell));
  const auto cy = static_cast<std::int64_t>(std::floor(wy / cell));
  for (std::int64_t j = cy - 1; j <= cy + 1; ++j) {
    for (std::int64_t i = cx - 1; i <= cx + 1; ++i) {
      const std::uint64_t h = lattice_hash(i, j, salt + 11);
      if (unit(h) >= cfg.speckle) continue;
      const std::uint64_t h2 = mix(h);
      const std::uint64_t h3 = mix(h2);
      const double px = (static_cast<double>(i) + unit(h2)) * cell;
      const double py = (static_cast<double>(j) + unit(h3)) * cell;
      const double r = 0.8 + 1.0 * unit(mix(h3));
      const double d2 = (wx - px) * (wx - px) + (wy - py) * (wy - py);
      if (d2 > 9.0 * r * r) continue;
      const double w = std::exp(-d2 / (2.0 * r * r));
      const double target = (h3 & 1) ? 0.1 : 0.95;
      val = val * (1.0 - w) + target * w;
    }
  }
  return hsv_to_rgb01(hue, sat, val);
}

Eigen::Vector3d blob_color(const BlobSpec& blob, std::size_t index, std::uint64_t seed, double lx, double ly) {
  const std::uint64_t salt = mix(seed ^ (0xb10bULL + index * 0x1000193ULL));
  const double u = lx / 4.5;
  const double v = ly / 4.5;
  const double n1 = stretch(fbm(u, v, salt + 1, 2), 1.6);
  const double n2 = stretch(fbm(u + 3.1, v + 8.7, salt + 2, 2), 1.6);
  const double n3 = stretch(fbm(u - 6.2, v + 1.4, salt + 3, 2), 1.6);
  const double h = blob.hue + blob.spread * 8.0 * (n1 - 0.5);
  const double s = blob.saturation + blob.spread * 0.16 * (n2 - 0.5);
  double val = blob.value + blob.spread * 0.36 * (n3 - 0.5);

  // Freckles: dark dots on lattices fixed to the blob. A sparse layer covers the whole
  // blob; a fine layer of small dots crowds the middle like knuckles.
  const double rx = blob.radius, ry = blob.radius * blob.aspect;
  auto freckles = [&](double cell, std::uint64_t layer, double base, double peak, double width, double r0) {
    const auto cx = static_cast<std::int64_t>(std::floor(lx / cell));
    const auto cy = static_cast<std::int64_t>(std::floor(ly / cell));
    for (std::int64_t j = cy - 1; j <= cy + 1; ++j) {
      for (std::int64_t i = cx - 1; i <= cx + 1; ++i) {
        const std::uint64_t hh = lattice_hash(i, j, salt + layer);
        const std::uint64_t h2 = mix(hh);
        const std::uint64_t h3 = mix(h2);
        const double px = (static_cast<double>(i) + unit(h2)) * cell;
        const double py = (static_cast<double>(j) + unit(h3)) * cell;
        const double rho2 = (px * px) / (rx * rx) + (py * py) / (ry * ry);
        if (unit(hh) >= base + peak * std::exp(-rho2 / (2.0 * width * width))) continue;
        const double r = r0 * (1.0 + unit(mix(h3)));
        const double d2 = (lx - px) * (lx - px) + (ly - py) * (ly - py);
        if (d2 > 9.0 * r * r) continue;
        val *= 1.0 - blob.spread * 0.6 * std::exp(-d2 / (2.0 * r * r));
      }
    }
  };
  freckles(7.0, 5, 0.25, 0.0, 1.0, 0.8);
  freckles(4.0, 6, 0.0, 0.9, 0.25, 0.5);
  return hsv_to_rgb01(h, s, val);
}

Eigen::Vector2d blob_radii(const BlobSpec& b) { return {b.radius, b.radius * b.aspect}; }

// Signed distance estimate (pixels, negative inside) from (x, y) to the blob outline.
double blob_distance(const BlobSpec& b, const Eigen::Vector2d& center, double x, double y) {
  const Eigen::Vector2d r = blob_radii(b);
  const double q = std::hypot((x - center.x()) / r.x(), (y - center.y()) / r.y());
  return (q - 1.0) * std::min(r.x(), r.y());
}

Homography step_homography(const SceneConfig& cfg, std::int64_t t) {
  const auto& m = cfg.motion;
  const double c = std::cos(m.rotation_deg * std::numbers::pi / 180.0) * m.zoom;
  const double s = std::sin(m.rotation_deg * std::numbers::pi / 180.0) * m.zoom;
  const double phase = kTwoPi * static_cast<double>(t) / m.shake_period;
  const double dx = m.tx + m.shake_x * std::sin(phase);
  const double dy = m.ty + m.shake_y * std::cos(phase);
  const double ox = 0.5 * (cfg.width - 1);
  const double oy = 0.5 * (cfg.height - 1);
  Homography h;
  h << c, -s, ox - c * ox + s * oy + dx,  //
      s, c, oy - s * ox - c * oy + dy,    //
      0, 0, 1;
  return h;
}

// Maps frame-t pixel coordinates back to the background plane.
Homography frame_to_world(const SceneConfig& cfg, std::int64_t t) {
  Homography g = Homography::Identity();
  for (std::int64_t k = 0; k < t; ++k) g = step_homography(cfg, k) * g;
  return g.inverse();
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("scene config: '" + key + "' is not a number: '" + value + "'");
  }
}

}  // namespace

Eigen::Vector2d BlobSpec::center(std::int64_t t) const {
  const double td = static_cast<double>(t);
  return {cx + ax * std::sin(kTwoPi * fx * td + phase_x), cy + ay * std::sin(kTwoPi * fy * td + phase_y)};
}

void SceneConfig::validate() const {
  if (frames < 1) throw ConfigError("scene config: frames must be positive");
  if (width < kMinFrameSide || height < kMinFrameSide) {
    throw ConfigError("scene config: frame sides must be at least " + std::to_string(kMinFrameSide));
  }
  if (noise < 0.0) throw ConfigError("scene config: noise must be non-negative");
  if (texture_scale <= 2.0) throw ConfigError("scene config: background.scale must exceed 2");
  if (speckle < 0.0 || speckle > 1.0) throw ConfigError("scene config: background.speckle must lie in [0, 1]");
  if (motion.zoom <= 0.0) throw ConfigError("scene config: background.zoom must be positive");
  if (motion.shake_period <= 0.0) throw ConfigError("scene config: background.shake_period must be positive");
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const auto& b = blobs[i];
    const std::string name = "blob " + std::to_string(i);
    if (b.radius <= 0.0 || b.aspect <= 0.0)
      throw ConfigError("scene config: " + name + " needs positive radius and aspect");
    if (b.disappear >= 0 && b.disappear < b.appear)
      throw ConfigError("scene config: " + name + " disappears before it appears");
    const Eigen::Vector2d r = blob_radii(b);
    for (std::int64_t t = 0; t < frames; ++t) {
      if (!b.visible(t)) continue;
      const Eigen::Vector2d c = b.center(t);
      if (c.x() - r.x() < 0.0 || c.x() + r.x() > width - 1 || c.y() - r.y() < 0.0 || c.y() + r.y() > height - 1) {
        throw ConfigError("scene config: " + name + " leaves the frame at frame " + std::to_string(t));
      }
    }
  }
}

SceneConfig scene_from_config(const KeyValueConfig& config) {
  SceneConfig cfg;
  std::set<long> blob_ids;
  for (const auto& [key, value] : config.values()) {
    const double v = parse_number(key, value);
    if (key == "frames") {
      cfg.frames = static_cast<int>(v);
    } else if (key == "width") {
      cfg.width = static_cast<int>(v);
    } else if (key == "height") {
      cfg.height = static_cast<int>(v);
    } else if (key == "seed") {
      if (v < 0) throw ConfigError("scene config: seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(v);
    } else if (key == "noise") {
      cfg.noise = v;
    } else if (key == "background.scale") {
      cfg.texture_scale = v;
    } else if (key == "background.speckle") {
      cfg.speckle = v;
    } else if (key == "background.tx") {
      cfg.motion.tx = v;
    } else if (key == "background.ty") {
      cfg.motion.ty = v;
    } else if (key == "background.rotation_deg") {
      cfg.motion.rotation_deg = v;
    } else if (key == "background.zoom") {
      cfg.motion.zoom = v;
    } else if (key == "background.shake_x") {
      cfg.motion.shake_x = v;
    } else if (key == "background.shake_y") {
      cfg.motion.shake_y = v;
    } else if (key == "background.shake_period") {
      cfg.motion.shake_period = v;
    } else if (key.starts_with("blob.")) {
      const auto dot = key.find('.', 5);
      if (dot == std::string::npos) throw ConfigError("scene config: malformed key '" + key + "'");
      try {
        std::size_t used = 0;
        const long id = std::stol(key.substr(5, dot - 5), &used);
        if (used != dot - 5 || id < 0) throw ConfigError("");
        blob_ids.insert(id);
      } catch (const std::exception&) {
        throw ConfigError("scene config: malformed blob index in '" + key + "'");
      }
    } else {
      throw ConfigError("scene config: unknown key '" + key + "'");
    }
  }
  for (long id : blob_ids) {
    BlobSpec b;
    const std::string prefix = "blob." + std::to_string(id) + ".";
    for (const auto& key : config.keys_with_prefix(prefix)) {
      const std::string field = key.substr(prefix.size());
      const double v = parse_number(key, *config.get(key));
      if (field == "cx") b.cx = v;
      else if (field == "cy") b.cy = v;
      else if (field == "ax") b.ax = v;
      else if (field == "ay") b.ay = v;
      else if (field == "fx") b.fx = v;
      else if (field == "fy") b.fy = v;
      else if (field == "phase_x") b.phase_x = v;
      else if (field == "phase_y") b.phase_y = v;
      else if (field == "radius") b.radius = v;
      else if (field == "aspect") b.aspect = v;
      else if (field == "appear") b.appear = static_cast<std::int64_t>(v);
      else if (field == "disappear") b.disappear = static_cast<std::int64_t>(v);
      else if (field == "hue") b.hue = v;
      else if (field == "saturation") b.saturation = v;
      else if (field == "value") b.value = v;
      else if (field == "spread") b.spread = v;
      else throw ConfigError("scene config: unknown key '" + key + "'");
    }
    cfg.blobs.push_back(b);
  }
  cfg.validate();
  return cfg;
}

SceneConfig reference_scene(std::uint64_t seed) {
  SceneConfig cfg;
  cfg.frames = 200;
  cfg.width = 640;
  cfg.height = 360;
  cfg.seed = seed;
  cfg.motion.tx = 1.6;
  cfg.motion.ty = 0.8;
  cfg.motion.shake_x = 0.5;
  cfg.motion.shake_y = 0.3;
  BlobSpec b;
  b.cx = 320.0;
  b.cy = 180.0;
  b.ax = 150.0;
  b.ay = 70.0;
  b.fx = 1.0 / 100.0;
  b.fy = 1.0 / 70.0;
  b.phase_x = 2.5;
  b.phase_y = 2.7;
  b.radius = 55.0;
  b.aspect = 1.25;
  cfg.blobs.push_back(b);
  cfg.validate();
  return cfg;
}

BinaryMask blob_mask(const SceneConfig& config, std::size_t blob, std::int64_t t) {
  BinaryMask mask = BinaryMask::Zero(config.height, config.width);
  const auto& b = config.blobs.at(blob);
  if (!b.visible(t)) return mask;
  const Eigen::Vector2d c = b.center(t);
  const Eigen::Vector2d r = blob_radii(b);
  const int y0 = std::max(0, static_cast<int>(std::floor(c.y() - r.y())));
  const int y1 = std::min(config.height - 1, static_cast<int>(std::ceil(c.y() + r.y())));
  const int x0 = std::max(0, static_cast<int>(std::floor(c.x() - r.x())));
  const int x1 = std::min(config.width - 1, static_cast<int>(std::ceil(c.x() + r.x())));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (blob_distance(b, c, x, y) <= 0.0) mask(y, x) = 1;
    }
  }
  return mask;
}

SceneTruth planted_truth(const SceneConfig& config) {
  config.validate();
  SceneTruth truth;
  for (std::int64_t t = 0; t + 1 < config.frames; ++t) truth.homographies.push_back(step_homography(config, t));
  for (std::int64_t t = 0; t < config.frames; ++t) {
    BinaryMask mask = BinaryMask::Zero(config.height, config.width);
    int visible = 0;
    for (std::size_t i = 0; i < config.blobs.size(); ++i) {
      if (!config.blobs[i].visible(t)) continue;
      ++visible;
      mask = mask.max(blob_mask(config, i, t));
    }
    truth.masks.push_back(std::move(mask));
    truth.visible_blobs.push_back(visible);
  }
  return truth;
}

Frame render_frame(const SceneConfig& config, std::int64_t t) {
  Frame frame = make_frame(t, config.width, config.height);
  const Homography to_world = frame_to_world(config, t);
  std::mt19937_64 rng(mix(config.seed) ^ mix(static_cast<std::uint64_t>(t) + 0x5eedULL));
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Eigen::Vector2d> centers;
  for (const auto& b : config.blobs) centers.push_back(b.center(t));

  for (int y = 0; y < config.height; ++y) {
    for (int x = 0; x < config.width; ++x) {
      const Eigen::Vector3d w = to_world * Eigen::Vector3d(x, y, 1.0);
      Eigen::Vector3d rgb = background_color(config, w.x() / w.z(), w.y() / w.z());
      for (std::size_t i = 0; i < config.blobs.size(); ++i) {
        const auto& b = config.blobs[i];
        if (!b.visible(t)) continue;
        const double coverage = std::clamp(0.5 - blob_distance(b, centers[i], x, y), 0.0, 1.0);
        if (coverage <= 0.0) continue;
        rgb = coverage * blob_color(b, i, config.seed, x - centers[i].x(), y - centers[i].y()) + (1.0 - coverage) * rgb;
      }
      auto px = frame.at(x, y);
      for (int ch = 0; ch < 3; ++ch) {
        const double n = config.noise > 0.0 ? config.noise * noise(rng) : 0.0;
        px(ch) = static_cast<std::uint8_t>(std::clamp(std::round(255.0 * rgb(ch) + n), 0.0, 255.0));
      }
    }
  }
  return frame;
}

SceneSequence generate(const SceneConfig& config) {
  config.validate();
  SceneSequence scene;
  SceneTruth truth = planted_truth(config);
  for (std::int64_t t = 0; t < config.frames; ++t) scene.frames.push_back(render_frame(config, t));
  scene.masks = std::move(truth.masks);
  return scene;
}

void write_scene(const SceneSequence& scene, const std::filesystem::path& output) {
  std::error_code ec;
  std::filesystem::create_directories(output / "frames", ec);
  std::filesystem::create_directories(output / "masks", ec);
  if (ec) throw InputError("cannot create output directory " + output.string() + ": " + ec.message());
  char name[32];
  for (std::size_t t = 0; t < scene.frames.size(); ++t) {
    std::snprintf(name, sizeof(name), "frame_%06zu.png", t);
    write_frame_png(scene.frames[t], output / "frames" / name);
    write_mask_png(scene.masks[t], output / "masks" / name);
  }
}

}  // namespace egohand
