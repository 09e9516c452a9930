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
#include <span>
#include <vector>

#include "egohand/motion.hpp"
#include "egohand/superpixel.hpp"

namespace egohand {

// Seed superpixels, ascending by id. `scores` is parallel to `ids` once filled by scoring.
struct SeedSet {
  std::vector<int> ids;
  std::vector<double> scores;

  bool empty() const { return ids.empty(); }
  std::size_t size() const { return ids.size(); }
};

/// Minimum fraction of mean_hand_matches a peak must reach to be kept.
inline constexpr double kSeedFractionOfMean = 0.1;

/// Current-frame endpoints q of the hand-related correspondences.
std::vector<Eigen::Vector2d> hand_endpoints(const MotionPartition& partition);

/// Sets every superpixel's hand_matches to the number of endpoints whose (rounded) pixel it owns.
/// Throws ParameterError for an endpoint more than half a pixel outside the frame.
void count_hand_matches(std::span<const Eigen::Vector2d> endpoints, SuperpixelMap& map);

/// A superpixel is a peak iff its hand_matches beats every hand_matches in its two-hop neighborhood,
/// equal values going to the lower id. Peaks with hand_matches >= 0.1 * mean_hand_matches (and at least one
/// correspondence) are seeds.
SeedSet detect_seeds(const SuperpixelMap& map, const AdjacencyGraph& graph, double mean_hand_matches);

}  // namespace egohand
