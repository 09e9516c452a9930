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

#include "egohand/growing.hpp"

#include <algorithm>

namespace egohand {

std::string to_string(HandPattern pattern) {
  switch (pattern) {
    case HandPattern::NoHand:
      return "no_hand";
    case HandPattern::SingleRegion:
      return "single_region";
    case HandPattern::TwoRegions:
      return "two_regions";
    case HandPattern::MultipleRegions:
      return "multiple_regions";
  }
  return "unknown";
}

HandPattern pattern_for_component_count(std::size_t count) {
  switch (count) {
    case 0:
      return HandPattern::NoHand;
    case 1:
      return HandPattern::SingleRegion;
    case 2:
      return HandPattern::TwoRegions;
    default:
      return HandPattern::MultipleRegions;
  }
}

double scaled_beta(double beta, int width, int height) {
  return beta * static_cast<double>(width) * height / (kReferenceWidth * kReferenceHeight);
}

HandDetectionResult refine_components(std::span<const int> accepted, const AdjacencyGraph& graph,
                                      const SuperpixelMap& map, double beta, std::int64_t frame_index) {
  if (beta < 0.0) throw ParameterError("beta must be non-negative");
  HandDetectionResult result;
  result.frame_index = frame_index;

  std::vector<int> members(accepted.begin(), accepted.end());
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  std::vector<std::uint8_t> in_set(static_cast<std::size_t>(graph.size()), 0);
  for (int v : members) in_set[static_cast<std::size_t>(v)] = 1;

  std::vector<int> stack;
  for (int start : members) {
    if (in_set[static_cast<std::size_t>(start)] != 1) continue;
    HandComponent comp;
    BinCounts counts = BinCounts::Zero();
    Eigen::Vector2d weighted = Eigen::Vector2d::Zero();
    in_set[static_cast<std::size_t>(start)] = 2;
    stack.push_back(start);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      comp.superpixels.push_back(v);
      const auto& rec = map.records[static_cast<std::size_t>(v)];
      comp.pixel_count += rec.pixel_count;
      weighted += rec.centroid * rec.pixel_count;
      counts += rec.bin_counts;
      for (int nb : graph.of(v)) {
        if (in_set[static_cast<std::size_t>(nb)] == 1) {
          in_set[static_cast<std::size_t>(nb)] = 2;
          stack.push_back(nb);
        }
      }
    }
    if (comp.pixel_count < beta) continue;
    std::sort(comp.superpixels.begin(), comp.superpixels.end());
    comp.centroid = weighted / comp.pixel_count;
    comp.histogram = smooth_histogram(counts);
    result.components.push_back(std::move(comp));
  }
  result.pattern = pattern_for_component_count(result.components.size());
  return result;
}

BinaryMask render_mask(const HandDetectionResult& result, const SuperpixelMap& map) {
  std::vector<std::uint8_t> hand(static_cast<std::size_t>(map.count()), 0);
  for (const auto& comp : result.components) {
    for (int v : comp.superpixels) hand[static_cast<std::size_t>(v)] = 1;
  }
  BinaryMask mask(map.height, map.width);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) mask(y, x) = hand[static_cast<std::size_t>(map.labels(y, x))];
  }
  return mask;
}

BinaryMask empty_mask(int width, int height) { return BinaryMask::Zero(height, width); }

}  // namespace egohand
