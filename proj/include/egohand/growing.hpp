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
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "egohand/errors.hpp"
#include "egohand/imaging.hpp"
#include "egohand/superpixel.hpp"

namespace egohand {

struct GrowStep {
  int id = -1;
  double score = 0.0;      // score of the accepted superpixel
  double reference = 0.0;  // previously accepted score; acceptance needs score >= alpha * reference
};

struct GrowResult {
  std::vector<int> accepted;  // seeds first (input order), then acceptance order
  std::vector<GrowStep> log;
  double seed_peak = 0.0;   // max seed score
};

/// Region growing from `seeds`: repeatedly take the best-scoring superpixel adjacent to
/// the accepted set, stopping once that score drops below alpha times the previously
/// accepted score. Equal scores go to the lower id. `score(id)` returns std::nullopt for
/// superpixels excluded from growing (early rejection); every seed must have a score.
/// Throws ParameterError on an empty seed set or alpha outside (0, 1).
template <typename ScoreFn>
GrowResult grow(std::span<const int> seeds, const AdjacencyGraph& graph, double alpha, ScoreFn&& score) {
  if (seeds.empty()) throw ParameterError("grow: empty seed set");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("grow: alpha must lie in (0, 1)");

  enum : std::uint8_t { kUnseen, kAccepted, kFrontier, kExcluded };
  std::vector<std::uint8_t> state(static_cast<std::size_t>(graph.size()), kUnseen);

  GrowResult result;
  bool first = true;
  for (int s : seeds) {
    const std::optional<double> v = score(s);
    if (!v) throw ParameterError("grow: seed " + std::to_string(s) + " has no score");
    result.seed_peak = first ? *v : std::max(result.seed_peak, *v);
    first = false;
    if (state[static_cast<std::size_t>(s)] != kAccepted) {
      state[static_cast<std::size_t>(s)] = kAccepted;
      result.accepted.push_back(s);
    }
  }

  // Max-heap on score, lowest id first among equals.
  auto worse = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
    return a.first < b.first || (a.first == b.first && a.second > b.second);
  };
  std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>, decltype(worse)> frontier(worse);
  auto expand = [&](int v) {
    for (int nb : graph.of(v)) {
      auto& st = state[static_cast<std::size_t>(nb)];
      if (st != kUnseen) continue;
      const std::optional<double> s = score(nb);
      if (!s) {
        st = kExcluded;
        continue;
      }
      st = kFrontier;
      frontier.emplace(*s, nb);
    }
  };
  for (int s : result.accepted) expand(s);

  double reference = result.seed_peak;
  while (!frontier.empty()) {
    const auto [candidate, id] = frontier.top();
    if (candidate < alpha * reference) break;
    frontier.pop();
    state[static_cast<std::size_t>(id)] = kAccepted;
    result.accepted.push_back(id);
    result.log.push_back({id, candidate, reference});
    reference = candidate;
    expand(id);
  }
  return result;
}

enum class HandPattern { NoHand, SingleRegion, TwoRegions, MultipleRegions };

std::string to_string(HandPattern pattern);
HandPattern pattern_for_component_count(std::size_t count);

struct HandComponent {
  std::vector<int> superpixels;  // ascending
  int pixel_count = 0;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();  // pixel mean
  Histogram histogram = Histogram::Constant(1.0 / kHistogramBins);
};

struct HandDetectionResult {
  std::int64_t frame_index = 0;
  std::vector<HandComponent> components;
  HandPattern pattern = HandPattern::NoHand;
};

/// Default minimum component size (pixels) at 640x360, and its area-proportional scaling.
inline constexpr double kDefaultBeta = 400.0;
inline constexpr double kDefaultAlpha = 0.6;
double scaled_beta(double beta, int width, int height);

/// Connected components of `accepted` under the adjacency graph, dropping those with fewer
/// than `beta` pixels. Components are ordered by their smallest superpixel id.
/// Throws ParameterError for beta < 0.
HandDetectionResult refine_components(std::span<const int> accepted, const AdjacencyGraph& graph,
                                      const SuperpixelMap& map, double beta, std::int64_t frame_index = 0);

/// Pixel mask of all surviving components.
BinaryMask render_mask(const HandDetectionResult& result, const SuperpixelMap& map);

/// Empty mask for frames without a detection.
BinaryMask empty_mask(int width, int height);

}  // namespace egohand
