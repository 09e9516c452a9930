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

#include "egohand/superpixel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "egohand/errors.hpp"

namespace egohand {
namespace {

struct LabImage {
  std::vector<float> l, a, b;
};

LabImage to_lab(const Frame& frame) {
  // RowMajor n x 3 uint8 is exactly an interleaved RGB image.
  const cv::Mat rgb(frame.height, frame.width, CV_8UC3, const_cast<std::uint8_t*>(frame.pixels.data()));
  cv::Mat rgbf, labf;
  rgb.convertTo(rgbf, CV_32FC3, 1.0 / 255.0);
  cv::cvtColor(rgbf, labf, cv::COLOR_RGB2Lab);
  const auto n = static_cast<std::size_t>(frame.pixel_count());
  LabImage lab;
  lab.l.resize(n);
  lab.a.resize(n);
  lab.b.resize(n);
  cv::Mat planes[3] = {cv::Mat(frame.height, frame.width, CV_32FC1, lab.l.data()),
                       cv::Mat(frame.height, frame.width, CV_32FC1, lab.a.data()),
                       cv::Mat(frame.height, frame.width, CV_32FC1, lab.b.data())};
  cv::split(labf, planes);
  return lab;
}

struct Center {
  float l, a, b, x, y;
};

// Minimal union-find over provisional fragment ids.
struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  }
  void unite(int into, int from) {
    into = find(into);
    from = find(from);
    if (into != from) parent[static_cast<std::size_t>(from)] = into;
  }
};

// Splits `labels` into 4-connected fragments, then merges every undersized fragment into
// the neighbor sharing its longest boundary. A cluster's largest fragment is undersized
// below `min_size`; its stray pieces below twice that, so noise cannot inflate the count.
LabelImage enforce_connectivity(const std::vector<int>& labels, int width, int height, int min_size) {
  const int n = width * height;
  std::vector<int> frag(static_cast<std::size_t>(n), -1);
  std::vector<int> sizes;
  std::vector<int> owner;
  std::vector<int> stack;
  for (int start = 0; start < n; ++start) {
    if (frag[static_cast<std::size_t>(start)] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    const int old = labels[static_cast<std::size_t>(start)];
    int size = 0;
    stack.push_back(start);
    frag[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      ++size;
      const int x = i % width, y = i / width;
      const int nbrs[4] = {x > 0 ? i - 1 : -1, x + 1 < width ? i + 1 : -1, y > 0 ? i - width : -1,
                           y + 1 < height ? i + width : -1};
      for (int j : nbrs) {
        if (j >= 0 && frag[static_cast<std::size_t>(j)] < 0 && labels[static_cast<std::size_t>(j)] == old) {
          frag[static_cast<std::size_t>(j)] = id;
          stack.push_back(j);
        }
      }
    }
    sizes.push_back(size);
    owner.push_back(old);
  }

  const int count = static_cast<int>(sizes.size());
  std::unordered_map<int, int> largest;  // cluster -> fragment
  for (int f = 0; f < count; ++f) {
    auto [it, fresh] = largest.try_emplace(owner[static_cast<std::size_t>(f)], f);
    if (!fresh && sizes[static_cast<std::size_t>(f)] > sizes[static_cast<std::size_t>(it->second)]) it->second = f;
  }
  std::vector<int> threshold(static_cast<std::size_t>(count), 2 * min_size);
  for (const auto& [cluster, f] : largest) threshold[static_cast<std::size_t>(f)] = min_size;
  DisjointSets sets(count);
  std::vector<int> root(static_cast<std::size_t>(count));
  std::vector<int> merged_size(static_cast<std::size_t>(count));
  for (int round = 0; round < 16; ++round) {
    std::fill(merged_size.begin(), merged_size.end(), 0);
    for (int f = 0; f < count; ++f) {
      root[static_cast<std::size_t>(f)] = sets.find(f);
      merged_size[static_cast<std::size_t>(root[static_cast<std::size_t>(f)])] += sizes[static_cast<std::size_t>(f)];
    }
    bool any_small = false;
    for (int f = 0; f < count; ++f) {
      if (root[static_cast<std::size_t>(f)] == f &&
          merged_size[static_cast<std::size_t>(f)] < threshold[static_cast<std::size_t>(f)])
        any_small = true;
    }
    if (!any_small) break;
    auto is_small = [&](int r) {
      return merged_size[static_cast<std::size_t>(r)] < threshold[static_cast<std::size_t>(r)];
    };

    // Shared boundary length between a small root and each neighbor root.
    std::unordered_map<std::uint64_t, int> boundary;
    auto tally = [&](int a, int b) {
      if (is_small(a)) boundary[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)]++;
      if (is_small(b)) boundary[(static_cast<std::uint64_t>(b) << 32) | static_cast<std::uint32_t>(a)]++;
    };
    for (int y = 0; y < height; ++y) {
      const int* f = frag.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
      const int* below = y + 1 < height ? f + width : nullptr;
      for (int x = 0; x < width; ++x) {
        const int fa = f[x];
        if (x + 1 < width && f[x + 1] != fa) {
          const int ra = root[static_cast<std::size_t>(fa)], rb = root[static_cast<std::size_t>(f[x + 1])];
          if (ra != rb) tally(ra, rb);
        }
        if (below && below[x] != fa) {
          const int ra = root[static_cast<std::size_t>(fa)], rb = root[static_cast<std::size_t>(below[x])];
          if (ra != rb) tally(ra, rb);
        }
      }
    }
    std::vector<std::pair<int, int>> best(static_cast<std::size_t>(count), {-1, -1});  // (length, neighbor)
    for (const auto& [key, len] : boundary) {
      const int a = static_cast<int>(key >> 32);
      const int b = static_cast<int>(key & 0xffffffffu);
      auto& slot = best[static_cast<std::size_t>(a)];
      if (len > slot.first || (len == slot.first && b < slot.second)) slot = {len, b};
    }
    for (int r = 0; r < count; ++r) {
      if (best[static_cast<std::size_t>(r)].second >= 0) sets.unite(best[static_cast<std::size_t>(r)].second, r);
    }
  }

  LabelImage out(height, width);
  std::vector<int> compact(static_cast<std::size_t>(count), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int root = sets.find(frag[static_cast<std::size_t>(i)]);
    int& c = compact[static_cast<std::size_t>(root)];
    if (c < 0) c = next++;
    out(i / width, i % width) = c;
  }
  return out;
}

}  // namespace

int scaled_superpixel_count(int base_count, int width, int height) {
  const double scale = static_cast<double>(width) * height / (kReferenceWidth * kReferenceHeight);
  return std::max(16, static_cast<int>(std::lround(base_count * scale)));
}

LabelImage slic_labels(const Frame& frame, int target_count, double compactness, int iterations) {
  validate_frame(frame);
  const int width = frame.width;
  const int height = frame.height;
  const int n = width * height;
  if (target_count < 16 || target_count > n / 16) {
    throw ParameterError("superpixel target count " + std::to_string(target_count) + " outside [16, " +
                         std::to_string(n / 16) + "]");
  }
  if (!(compactness > 0.0)) throw ParameterError("compactness must be positive");

  const LabImage lab = to_lab(frame);
  const double step = std::sqrt(static_cast<double>(n) / target_count);
  const int nx = std::max(1, static_cast<int>(std::lround(width / step)));
  const int ny = std::max(1, static_cast<int>(std::lround(height / step)));
  const double step_x = static_cast<double>(width) / nx;
  const double step_y = static_cast<double>(height) / ny;

  auto gradient = [&](int x, int y) {
    const int l = y * width + std::max(x - 1, 0), r = y * width + std::min(x + 1, width - 1);
    const int u = std::max(y - 1, 0) * width + x, d = std::min(y + 1, height - 1) * width + x;
    auto sq = [](float v) { return v * v; };
    return sq(lab.l[r] - lab.l[l]) + sq(lab.a[r] - lab.a[l]) + sq(lab.b[r] - lab.b[l]) + sq(lab.l[d] - lab.l[u]) +
           sq(lab.a[d] - lab.a[u]) + sq(lab.b[d] - lab.b[u]);
  };

  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int cx = std::min(width - 1, static_cast<int>((i + 0.5) * step_x));
      int cy = std::min(height - 1, static_cast<int>((j + 0.5) * step_y));
      int best_x = cx, best_y = cy;
      float best_g = std::numeric_limits<float>::max();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = std::clamp(cx + dx, 0, width - 1), y = std::clamp(cy + dy, 0, height - 1);
          const float g = gradient(x, y);
          if (g < best_g) {
            best_g = g;
            best_x = x;
            best_y = y;
          }
        }
      }
      const int p = best_y * width + best_x;
      centers.push_back({lab.l[p], lab.a[p], lab.b[p], static_cast<float>(best_x), static_cast<float>(best_y)});
    }
  }

  const float s = static_cast<float>(std::max(step_x, step_y));
  const float spatial_weight = static_cast<float>(compactness * compactness) / (s * s);
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::vector<float> dist(static_cast<std::size_t>(n));
  std::vector<double> sums(centers.size() * 5);
  std::vector<int> counts(centers.size());

  std::vector<float> dx2(static_cast<std::size_t>(width));
  for (int iter = 0; iter < iterations; ++iter) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<float>::max());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center c = centers[k];
      const int label = static_cast<int>(k);
      const int x0 = std::max(0, static_cast<int>(c.x - s)), x1 = std::min(width, static_cast<int>(c.x + s) + 1);
      const int y0 = std::max(0, static_cast<int>(c.y - s)), y1 = std::min(height, static_cast<int>(c.y + s) + 1);
      for (int x = x0; x < x1; ++x) dx2[static_cast<std::size_t>(x)] = (x - c.x) * (x - c.x) * spatial_weight;
      for (int y = y0; y < y1; ++y) {
        const float dy2 = (y - c.y) * (y - c.y) * spatial_weight;
        const std::size_t row = static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
        const float* __restrict pl = lab.l.data() + row;
        const float* __restrict pa = lab.a.data() + row;
        const float* __restrict pb = lab.b.data() + row;
        float* __restrict pd = dist.data() + row;
        int* __restrict plab = labels.data() + row;
        const float* __restrict pdx = dx2.data();
        for (int x = x0; x < x1; ++x) {
          const float dl = pl[x] - c.l, da = pa[x] - c.a, db = pb[x] - c.b;
          const float d = dl * dl + da * da + db * db + pdx[x] + dy2;
          const int closer = -static_cast<int>(d < pd[x]);
          pd[x] = std::min(d, pd[x]);
          plab[x] ^= (plab[x] ^ label) & closer;
        }
      }
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    // Labels come in horizontal runs; accumulate a run in registers and flush once.
    for (int y = 0; y < height; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
      const int* plab = labels.data() + row;
      for (int x = 0; x < width;) {
        const int k = plab[x];
        const int start = x;
        float sl = 0.0f, sa = 0.0f, sb = 0.0f;
        for (; x < width && plab[x] == k; ++x) {
          sl += lab.l[row + static_cast<std::size_t>(x)];
          sa += lab.a[row + static_cast<std::size_t>(x)];
          sb += lab.b[row + static_cast<std::size_t>(x)];
        }
        const int len = x - start;
        double* acc = &sums[static_cast<std::size_t>(k) * 5];
        acc[0] += sl;
        acc[1] += sa;
        acc[2] += sb;
        acc[3] += 0.5 * len * (start + x - 1);
        acc[4] += static_cast<double>(y) * len;
        counts[static_cast<std::size_t>(k)] += len;
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      const double inv = 1.0 / counts[k];
      const double* acc = &sums[k * 5];
      centers[k] = {static_cast<float>(acc[0] * inv), static_cast<float>(acc[1] * inv),
                    static_cast<float>(acc[2] * inv), static_cast<float>(acc[3] * inv),
                    static_cast<float>(acc[4] * inv)};
    }
  }

  const int min_size = std::max(1, n / target_count / 4);
  return enforce_connectivity(labels, width, height, min_size);
}

SuperpixelMap make_superpixel_map(LabelImage labels, const BinImage& bins) {
  SuperpixelMap map;
  map.height = static_cast<int>(labels.rows());
  map.width = static_cast<int>(labels.cols());
  if (bins.rows() != labels.size()) throw ParameterError("label map and bin image differ in size");
  const int count = labels.size() > 0 ? labels.maxCoeff() + 1 : 0;
  if (labels.size() > 0 && labels.minCoeff() < 0) throw ParameterError("negative superpixel label");
  map.records.assign(static_cast<std::size_t>(count), SuperpixelRecord{});
  std::vector<Eigen::Vector2d> sums(static_cast<std::size_t>(count), Eigen::Vector2d::Zero());
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const auto k = static_cast<std::size_t>(labels(y, x));
      auto& rec = map.records[k];
      ++rec.pixel_count;
      sums[k] += Eigen::Vector2d(x, y);
      const auto b = bins.row(static_cast<Eigen::Index>(y) * map.width + x);
      rec.bin_counts(b(0)) += 1.0;
      rec.bin_counts(b(1)) += 1.0;
      rec.bin_counts(b(2)) += 1.0;
    }
  }
  for (std::size_t k = 0; k < map.records.size(); ++k) {
    auto& rec = map.records[k];
    if (rec.pixel_count == 0) throw ParameterError("superpixel " + std::to_string(k) + " has no pixels");
    rec.centroid = sums[k] / rec.pixel_count;
    rec.histogram = smooth_histogram(rec.bin_counts);
  }
  map.labels = std::move(labels);
  return map;
}

SuperpixelMap make_superpixel_map(LabelImage labels, const HsvFrame& hsv) {
  return make_superpixel_map(std::move(labels), compute_bin_image(hsv));
}

SuperpixelMap slic_segment(const Frame& frame, int target_count, double compactness) {
  return make_superpixel_map(slic_labels(frame, target_count, compactness), rgb_to_hsv(frame));
}

AdjacencyGraph build_adjacency(const LabelImage& labels, int count) {
  AdjacencyGraph graph;
  graph.neighbors.assign(static_cast<std::size_t>(count), {});
  const auto rows = labels.rows(), cols = labels.cols();
  auto link = [&](int a, int b) {
    if (a == b) return;
    graph.neighbors[static_cast<std::size_t>(a)].push_back(b);
    graph.neighbors[static_cast<std::size_t>(b)].push_back(a);
  };
  for (Eigen::Index y = 0; y < rows; ++y) {
    for (Eigen::Index x = 0; x < cols; ++x) {
      const int a = labels(y, x);
      if (x + 1 < cols) link(a, labels(y, x + 1));
      if (y + 1 < rows) {
        link(a, labels(y + 1, x));
        if (x + 1 < cols) link(a, labels(y + 1, x + 1));
        if (x > 0) link(a, labels(y + 1, x - 1));
      }
    }
  }
  for (auto& list : graph.neighbors) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return graph;
}

AdjacencyGraph build_adjacency(const SuperpixelMap& map) { return build_adjacency(map.labels, map.count()); }

std::vector<int> two_hop_neighborhood(const AdjacencyGraph& graph, int id) {
  if (id < 0 || id >= graph.size()) throw ParameterError("superpixel id out of range");
  std::vector<int> out;
  for (int n1 : graph.of(id)) {
    out.push_back(n1);
    for (int n2 : graph.of(n1)) out.push_back(n2);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove(out.begin(), out.end(), id), out.end());
  return out;
}

}  // namespace egohand
