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

#include <queue>
#include <random>
#include <set>

#include "egohand/errors.hpp"
#include "egohand/superpixel.hpp"
#include "test_support.hpp"

using namespace egohand;

namespace {

// Every label region is one 4-connected piece, and labels are dense 0..L-1.
void expect_connected_partition(const LabelImage& labels) {
  const int count = labels.maxCoeff() + 1;
  ASSERT_EQ(labels.minCoeff(), 0);
  std::vector<int> pieces(static_cast<std::size_t>(count), 0);
  Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(labels.rows(), labels.cols());
  for (Eigen::Index y = 0; y < labels.rows(); ++y)
    for (Eigen::Index x = 0; x < labels.cols(); ++x) {
      if (seen(y, x)) continue;
      const int l = labels(y, x);
      ++pieces[static_cast<std::size_t>(l)];
      std::queue<std::pair<Eigen::Index, Eigen::Index>> q;
      q.emplace(y, x);
      seen(y, x) = 1;
      while (!q.empty()) {
        const auto [cy, cx] = q.front();
        q.pop();
        const Eigen::Index dy[] = {-1, 1, 0, 0}, dx[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const Eigen::Index ny = cy + dy[k], nx = cx + dx[k];
          if (ny < 0 || nx < 0 || ny >= labels.rows() || nx >= labels.cols()) continue;
          if (seen(ny, nx) || labels(ny, nx) != l) continue;
          seen(ny, nx) = 1;
          q.emplace(ny, nx);
        }
      }
    }
  for (int l = 0; l < count; ++l) EXPECT_EQ(pieces[static_cast<std::size_t>(l)], 1) << "label " << l;
}

LabelImage grid_labels(int cols, int rows, int cell) {
  LabelImage labels(rows * cell, cols * cell);
  for (int y = 0; y < rows * cell; ++y)
    for (int x = 0; x < cols * cell; ++x) labels(y, x) = (y / cell) * cols + x / cell;
  return labels;
}

std::vector<int> bfs_two_hop(const AdjacencyGraph& g, int id) {
  std::vector<int> depth(static_cast<std::size_t>(g.size()), -1);
  std::queue<int> q;
  depth[static_cast<std::size_t>(id)] = 0;
  q.push(id);
  std::vector<int> out;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    if (depth[static_cast<std::size_t>(v)] == 2) continue;
    for (int nb : g.of(v)) {
      if (depth[static_cast<std::size_t>(nb)] >= 0) continue;
      depth[static_cast<std::size_t>(nb)] = depth[static_cast<std::size_t>(v)] + 1;
      out.push_back(nb);
      q.push(nb);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Slic, UniformGrayIsNearRegular) {
  const Frame f = fixtures::solid_frame(640, 360, 128, 128, 128);
  const auto map = slic_segment(f, 600, 10.0);
  EXPECT_GE(map.count(), 420);
  EXPECT_LE(map.count(), 780);
  const double mean = 640.0 * 360.0 / map.count();
  int total = 0;
  for (const auto& r : map.records) {
    EXPECT_LE(r.pixel_count, 2.0 * mean);
    EXPECT_GE(r.pixel_count, mean / 2.0);
    total += r.pixel_count;
  }
  EXPECT_EQ(total, 640 * 360);
  expect_connected_partition(map.labels);
}

TEST(Slic, AdheresToAStepEdge) {
  Frame f = make_frame(0, 320, 240);
  for (int y = 0; y < 240; ++y)
    for (int x = 160; x < 320; ++x) f.at(x, y).setConstant(255);
  const auto labels = slic_labels(f, 100, 10.0);
  const int count = labels.maxCoeff() + 1;
  std::vector<int> white(static_cast<std::size_t>(count), 0), size(static_cast<std::size_t>(count), 0);
  for (int y = 0; y < 240; ++y)
    for (int x = 0; x < 320; ++x) {
      ++size[static_cast<std::size_t>(labels(y, x))];
      white[static_cast<std::size_t>(labels(y, x))] += x >= 160;
    }
  for (int l = 0; l < count; ++l) {
    const double share = static_cast<double>(white[static_cast<std::size_t>(l)]) / size[static_cast<std::size_t>(l)];
    EXPECT_GE(std::max(share, 1.0 - share), 0.95) << "label " << l;
  }
}

TEST(Slic, SmallFrameCountAndDeterminism) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> u(0, 255);
  Frame f = make_frame(0, 64, 64);
  for (Eigen::Index i = 0; i < f.pixels.size(); ++i) f.pixels.data()[i] = static_cast<std::uint8_t>(u(rng));
  const auto a = slic_labels(f, 16, 10.0);
  const int count = a.maxCoeff() + 1;
  EXPECT_GE(count, 12);
  EXPECT_LE(count, 21);
  expect_connected_partition(a);
  EXPECT_TRUE((slic_labels(f, 16, 10.0) == a).all());
}

TEST(Slic, ParameterRange) {
  const Frame f = fixtures::solid_frame(64, 64, 0, 0, 0);
  EXPECT_THROW(slic_labels(f, 15, 10.0), ParameterError);
  EXPECT_THROW(slic_labels(f, 257, 10.0), ParameterError);
  EXPECT_THROW(slic_labels(f, 16, 0.0), ParameterError);
  EXPECT_EQ(scaled_superpixel_count(600, 640, 360), 600);
  EXPECT_EQ(scaled_superpixel_count(600, 320, 180), 150);
}

TEST(SuperpixelMap, RecordsMatchDirectSums) {
  const LabelImage labels = grid_labels(2, 1, 4);
  BinImage bins(32, 3);
  bins.rowwise() = Eigen::Matrix<std::uint8_t, 1, 3>(0, 8, 12);
  const auto map = make_superpixel_map(labels, bins);
  ASSERT_EQ(map.count(), 2);
  EXPECT_EQ(map.records[0].pixel_count, 16);
  EXPECT_DOUBLE_EQ(map.records[0].centroid.x(), 1.5);
  EXPECT_DOUBLE_EQ(map.records[1].centroid.x(), 5.5);
  EXPECT_DOUBLE_EQ(map.records[1].centroid.y(), 1.5);
  EXPECT_DOUBLE_EQ(map.records[0].bin_counts.sum(), 48.0);
}

TEST(Adjacency, MinimalAndGridLayouts) {
  const auto pair = build_adjacency(grid_labels(2, 1, 4), 2);
  EXPECT_EQ(pair.of(0), std::vector<int>{1});
  EXPECT_EQ(pair.of(1), std::vector<int>{0});

  const auto grid = build_adjacency(grid_labels(3, 3, 5), 9);
  for (int corner : {0, 2, 6, 8}) EXPECT_EQ(grid.of(corner).size(), 3u);
  EXPECT_EQ(grid.of(4).size(), 8u);
  EXPECT_EQ(grid.of(1).size(), 5u);

  const auto single = build_adjacency(LabelImage::Zero(6, 6), 1);
  EXPECT_TRUE(single.of(0).empty());
}

TEST(Adjacency, MatchesPixelEnumerationOnSlic) {
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> u(0, 255);
  Frame f = make_frame(0, 128, 96);
  for (Eigen::Index i = 0; i < f.pixels.size(); ++i) f.pixels.data()[i] = static_cast<std::uint8_t>(u(rng));
  const auto labels = slic_labels(f, 48, 10.0);
  const int count = labels.maxCoeff() + 1;
  const auto g = build_adjacency(labels, count);
  std::vector<std::set<int>> oracle(static_cast<std::size_t>(count));
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 128; ++x)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || nx < 0 || ny >= 96 || nx >= 128) continue;
          if (labels(ny, nx) != labels(y, x)) oracle[static_cast<std::size_t>(labels(y, x))].insert(labels(ny, nx));
        }
  for (int l = 0; l < count; ++l) {
    EXPECT_EQ(g.of(l), std::vector<int>(oracle[static_cast<std::size_t>(l)].begin(),
                                        oracle[static_cast<std::size_t>(l)].end()));
    for (int nb : g.of(l)) EXPECT_TRUE(std::binary_search(g.of(nb).begin(), g.of(nb).end(), l));
  }
}

TEST(TwoHop, PathIsolatedAndGrid) {
  AdjacencyGraph path{{{1}, {0, 2}, {1}}};
  EXPECT_EQ(two_hop_neighborhood(path, 0), (std::vector<int>{1, 2}));
  AdjacencyGraph lone{{{}}};
  EXPECT_TRUE(two_hop_neighborhood(lone, 0).empty());
  EXPECT_THROW(two_hop_neighborhood(lone, 1), ParameterError);
  EXPECT_THROW(two_hop_neighborhood(lone, -1), ParameterError);

  const auto grid = build_adjacency(grid_labels(5, 5, 3), 25);
  const auto ring = two_hop_neighborhood(grid, 12);
  EXPECT_EQ(ring.size(), 24u);
  EXPECT_EQ(ring, bfs_two_hop(grid, 12));
  for (int id = 0; id < 25; ++id) EXPECT_EQ(two_hop_neighborhood(grid, id), bfs_two_hop(grid, id));
}
