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

#include <gtest/gtest.h>

#include <random>

#include "egohand/errors.hpp"
#include "egohand/seeding.hpp"

using namespace egohand;

namespace {

// Cell-grid label map of cols x rows superpixels, each cell x cell pixels.
SuperpixelMap grid_map(int cols, int rows, int cell) {
  LabelImage labels(rows * cell, cols * cell);
  for (int y = 0; y < rows * cell; ++y)
    for (int x = 0; x < cols * cell; ++x) labels(y, x) = (y / cell) * cols + x / cell;
  BinImage bins(labels.size(), 3);
  bins.rowwise() = Eigen::Matrix<std::uint8_t, 1, 3>(0, 8, 12);
  return make_superpixel_map(labels, bins);
}

void set_hand_matches(SuperpixelMap& map, std::initializer_list<std::pair<int, int>> values) {
  for (auto& r : map.records) r.hand_matches = 0;
  for (auto [id, l] : values) map.records[static_cast<std::size_t>(id)].hand_matches = l;
}

// Peak test straight from the definition, over an explicit two-hop set.
std::vector<int> oracle_seeds(const SuperpixelMap& map, const AdjacencyGraph& g, double mean_hand_matches) {
  std::vector<int> out;
  for (int k = 0; k < map.count(); ++k) {
    const int l = map.records[static_cast<std::size_t>(k)].hand_matches;
    if (l < 1 || l < 0.1 * mean_hand_matches) continue;
    std::vector<bool> near(static_cast<std::size_t>(map.count()), false);
    for (int a : g.of(k)) {
      near[static_cast<std::size_t>(a)] = true;
      for (int b : g.of(a)) near[static_cast<std::size_t>(b)] = true;
    }
    near[static_cast<std::size_t>(k)] = false;
    bool peak = true;
    for (int j = 0; j < map.count(); ++j) {
      if (!near[static_cast<std::size_t>(j)]) continue;
      const int o = map.records[static_cast<std::size_t>(j)].hand_matches;
      if (o > l || (o == l && j < k)) peak = false;
    }
    if (peak) out.push_back(k);
  }
  return out;
}

}  // namespace

TEST(HandMatchCount, Counts) {
  auto map = grid_map(4, 4, 10);
  count_hand_matches({}, map);
  for (const auto& r : map.records) EXPECT_EQ(r.hand_matches, 0);

  // Superpixel 3 covers x in [30, 40), y in [0, 10).
  std::vector<Eigen::Vector2d> five(5, Eigen::Vector2d(33.2, 4.0));
  count_hand_matches(five, map);
  for (int k = 0; k < map.count(); ++k)
    EXPECT_EQ(map.records[static_cast<std::size_t>(k)].hand_matches, k == 3 ? 5 : 0);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.49, 39.49);
  std::vector<Eigen::Vector2d> pts;
  std::vector<int> oracle(16, 0);
  for (int i = 0; i < 100; ++i) {
    pts.emplace_back(u(rng), u(rng));
    const int x = static_cast<int>(std::lround(pts.back().x())), y = static_cast<int>(std::lround(pts.back().y()));
    ++oracle[static_cast<std::size_t>(map.labels(y, x))];
  }
  count_hand_matches(pts, map);
  int total = 0;
  for (int k = 0; k < 16; ++k) {
    EXPECT_EQ(map.records[static_cast<std::size_t>(k)].hand_matches, oracle[static_cast<std::size_t>(k)]);
    total += map.records[static_cast<std::size_t>(k)].hand_matches;
  }
  EXPECT_EQ(total, 100);

  std::vector<Eigen::Vector2d> outside{{40.6, 3.0}};
  EXPECT_THROW(count_hand_matches(outside, map), ParameterError);
}

TEST(Seeds, ThresholdAndTies) {
  auto map = grid_map(6, 6, 8);
  const auto g = build_adjacency(map);
  set_hand_matches(map, {});
  EXPECT_TRUE(detect_seeds(map, g, 20.0).empty());

  set_hand_matches(map, {{14, 5}});
  EXPECT_EQ(detect_seeds(map, g, 20.0).ids, std::vector<int>{14});
  EXPECT_TRUE(detect_seeds(map, g, 60.0).empty());

  set_hand_matches(map, {{14, 7}, {15, 7}});
  EXPECT_EQ(detect_seeds(map, g, 20.0).ids, std::vector<int>{14});

  // Far apart peaks both survive.
  set_hand_matches(map, {{0, 3}, {35, 4}});
  EXPECT_EQ(detect_seeds(map, g, 20.0).ids, (std::vector<int>{0, 35}));

  // A lone correspondence is a seed when mean_hand_matches is tiny, never when hand_matches is zero.
  set_hand_matches(map, {{20, 1}});
  EXPECT_EQ(detect_seeds(map, g, 0.0).ids, std::vector<int>{20});
}

TEST(Seeds, MatchDefinitionOnRandomMaps) {
  auto map = grid_map(8, 6, 6);
  const auto g = build_adjacency(map);
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> u(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    for (auto& r : map.records) r.hand_matches = u(rng) < 4 ? 0 : u(rng);
    const double mean_hand_matches = trial % 3 == 0 ? 30.0 : 5.0;
    const auto seeds = detect_seeds(map, g, mean_hand_matches);
    EXPECT_EQ(seeds.ids, oracle_seeds(map, g, mean_hand_matches));
    EXPECT_EQ(seeds.scores.size(), seeds.ids.size());
    // Sparsity: no two seeds within two hops.
    for (int s : seeds.ids)
      for (int j : two_hop_neighborhood(g, s)) EXPECT_FALSE(std::binary_search(seeds.ids.begin(), seeds.ids.end(), j));
  }
}

TEST(Seeds, RaisingMeanOnlyRemovesSeeds) {
  auto map = grid_map(8, 6, 6);
  const auto g = build_adjacency(map);
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> u(0, 12);
  for (auto& r : map.records) r.hand_matches = u(rng);
  std::vector<int> previous = detect_seeds(map, g, 0.0).ids;
  for (double mean_hand_matches = 10.0; mean_hand_matches <= 150.0; mean_hand_matches += 10.0) {
    const auto now = detect_seeds(map, g, mean_hand_matches).ids;
    EXPECT_TRUE(std::includes(previous.begin(), previous.end(), now.begin(), now.end()));
    previous = now;
  }
}

TEST(Seeds, EndpointsAreCurrentFramePoints) {
  MotionPartition part;
  Correspondence a;
  a.p = {1, 2};
  a.q = {3, 4};
  Correspondence b;
  b.p = {5, 6};
  b.q = {7, 8};
  part.all = {a, b};
  part.hand = {1};
  const auto e = hand_endpoints(part);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0], Eigen::Vector2d(7, 8));
}
