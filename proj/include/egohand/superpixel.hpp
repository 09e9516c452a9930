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
#include <vector>

#include "egohand/imaging.hpp"

namespace egohand {

using LabelImage = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SuperpixelRecord {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();  // mean (x, y) of member pixels
  int pixel_count = 0;
  BinCounts bin_counts = BinCounts::Zero();
  Histogram histogram = Histogram::Constant(1.0 / kHistogramBins);
  int hand_matches = 0;  // hand-correspondence count, filled by seeding
};

// Over-segmentation of one frame. labels(y, x) is in [0, count()).
struct SuperpixelMap {
  int width = 0;
  int height = 0;
  LabelImage labels;
  std::vector<SuperpixelRecord> records;

  int count() const { return static_cast<int>(records.size()); }
  int label_at(int x, int y) const { return labels(y, x); }
};

// Symmetric, irreflexive neighbor lists, each sorted ascending.
struct AdjacencyGraph {
  std::vector<std::vector<int>> neighbors;

  int size() const { return static_cast<int>(neighbors.size()); }
  const std::vector<int>& of(int id) const { return neighbors[static_cast<std::size_t>(id)]; }
};

inline constexpr int kReferenceWidth = 640;
inline constexpr int kReferenceHeight = 360;

/// Scales a superpixel count given at 640x360 to another resolution by area.
int scaled_superpixel_count(int base_count, int width, int height);

/// SLIC label map: CIELAB + position k-means from a regular grid (seeds nudged to the
/// lowest-gradient pixel of their 3x3 neighborhood), fixed 10 iterations, then fragments
/// smaller than a quarter of the nominal size are merged into the neighbor sharing the
/// longest boundary. Output labels are 4-connected and numbered in raster order.
/// Throws ParameterError unless 16 <= target_count <= width*height/16 and compactness > 0.
LabelImage slic_labels(const Frame& frame, int target_count, double compactness, int iterations = 10);

/// Per-superpixel statistics for an arbitrary dense label map with ids 0..L-1.
SuperpixelMap make_superpixel_map(LabelImage labels, const BinImage& bins);
SuperpixelMap make_superpixel_map(LabelImage labels, const HsvFrame& hsv);

/// slic_labels followed by make_superpixel_map on the frame's HSV bins.
SuperpixelMap slic_segment(const Frame& frame, int target_count, double compactness);

/// Two superpixels are adjacent iff a pixel of one 8-neighbors a pixel of the other.
AdjacencyGraph build_adjacency(const LabelImage& labels, int count);
AdjacencyGraph build_adjacency(const SuperpixelMap& map);

/// Neighbors plus neighbors-of-neighbors, excluding `id`, sorted ascending.
/// Throws ParameterError for an out-of-range id.
std::vector<int> two_hop_neighborhood(const AdjacencyGraph& graph, int id);

}  // namespace egohand
