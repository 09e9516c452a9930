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

#include "egohand/seeding.hpp"

#include <cmath>

#include "egohand/errors.hpp"

namespace egohand {

std::vector<Eigen::Vector2d> hand_endpoints(const MotionPartition& partition) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(partition.hand.size());
  for (int k : partition.hand) out.push_back(partition.all[static_cast<std::size_t>(k)].q);
  return out;
}

void count_hand_matches(std::span<const Eigen::Vector2d> endpoints, SuperpixelMap& map) {
  for (auto& rec : map.records) rec.hand_matches = 0;
  for (const auto& q : endpoints) {
    const auto x = static_cast<int>(std::floor(q.x() + 0.5));
    const auto y = static_cast<int>(std::floor(q.y() + 0.5));
    if (x < 0 || y < 0 || x >= map.width || y >= map.height) {
      throw ParameterError("hand correspondence endpoint outside the frame");
    }
    ++map.records[static_cast<std::size_t>(map.label_at(x, y))].hand_matches;
  }
}

SeedSet detect_seeds(const SuperpixelMap& map, const AdjacencyGraph& graph, double mean_hand_matches) {
  SeedSet seeds;
  const double floor = kSeedFractionOfMean * mean_hand_matches;
  for (int k = 0; k < map.count(); ++k) {
    const int hand_matches = map.records[static_cast<std::size_t>(k)].hand_matches;
    if (hand_matches < 1 || hand_matches < floor) continue;
    bool peak = true;
    for (int j : two_hop_neighborhood(graph, k)) {
      const int other = map.records[static_cast<std::size_t>(j)].hand_matches;
      if (other > hand_matches || (other == hand_matches && j < k)) {
        peak = false;
        break;
      }
    }
    if (peak) seeds.ids.push_back(k);
  }
  seeds.scores.assign(seeds.ids.size(), 0.0);
  return seeds;
}

}  // namespace egohand
