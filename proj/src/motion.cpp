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

#include "egohand/motion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <opencv2/core.hpp>
#include <opencv2/features2d.hpp>
#include <random>

#include "egohand/errors.hpp"

namespace egohand {
namespace {

// Successive frames differ little in scale; a shallow pyramid keeps keypoints on fine
// levels where their positions are accurate to about a pixel.
constexpr int kPyramidLevels = 3;
constexpr float kPyramidScale = 1.2f;

}  // namespace

FeatureSet extract_features(const Frame& frame, int max_features) {
  validate_frame(frame);
  cv::Mat gray(frame.height, frame.width, CV_8UC1);
  for (int y = 0; y < frame.height; ++y) {
    auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < frame.width; ++x) {
      const auto px = frame.at(x, y);
      // ITU-R BT.601 luma, as cv::cvtColor computes it.
      row[x] = static_cast<std::uint8_t>((299 * px(0) + 587 * px(1) + 114 * px(2) + 500) / 1000);
    }
  }
  auto orb = cv::ORB::create(max_features, kPyramidScale, kPyramidLevels);
  std::vector<cv::KeyPoint> keypoints;
  cv::Mat descriptors;
  orb->detectAndCompute(gray, cv::noArray(), keypoints, descriptors);

  FeatureSet out;
  out.points.reserve(keypoints.size());
  out.descriptors.reserve(keypoints.size());
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    std::array<std::uint64_t, 4> d{};
    std::memcpy(d.data(), descriptors.ptr<std::uint8_t>(static_cast<int>(i)), 32);
    out.points.emplace_back(keypoints[i].pt.x, keypoints[i].pt.y);
    out.descriptors.push_back(d);
  }
  return out;
}

namespace {

int hamming(const std::array<std::uint64_t, 4>& a, const std::array<std::uint64_t, 4>& b) {
  return std::popcount(a[0] ^ b[0]) + std::popcount(a[1] ^ b[1]) + std::popcount(a[2] ^ b[2]) +
         std::popcount(a[3] ^ b[3]);
}

// Nearest neighbour in each direction from one distance table:
// forward[i] = nearest cur index for prev i, backward[j] = nearest prev index for cur j.
struct NearestPairs {
  std::vector<std::pair<int, int>> forward;
  std::vector<int> backward;
};

NearestPairs nearest_both(const FeatureSet& prev, const FeatureSet& cur) {
  const std::size_t n = prev.descriptors.size(), m = cur.descriptors.size();
  NearestPairs out;
  out.forward.assign(n, {-1, std::numeric_limits<int>::max()});
  out.backward.assign(m, -1);
  std::vector<int> backward_best(m, std::numeric_limits<int>::max());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = prev.descriptors[i];
    auto& best = out.forward[i];
    for (std::size_t j = 0; j < m; ++j) {
      const int d = hamming(a, cur.descriptors[j]);
      if (d < best.second) best = {static_cast<int>(j), d};
      if (d < backward_best[j]) {
        backward_best[j] = d;
        out.backward[j] = static_cast<int>(i);
      }
    }
  }
  return out;
}

}  // namespace

MatchResult match_features(const FeatureSet& prev, const FeatureSet& cur, int max_features) {
  const auto [forward, backward] = nearest_both(prev, cur);
  std::vector<std::pair<int, int>> mutual;  // (distance, prev index)
  for (std::size_t i = 0; i < forward.size(); ++i) {
    const int j = forward[i].first;
    if (j >= 0 && backward[static_cast<std::size_t>(j)] == static_cast<int>(i)) {
      mutual.emplace_back(forward[i].second, static_cast<int>(i));
    }
  }
  std::stable_sort(mutual.begin(), mutual.end());
  if (static_cast<int>(mutual.size()) > max_features) mutual.resize(static_cast<std::size_t>(max_features));

  MatchResult result;
  if (static_cast<int>(mutual.size()) < kMinMatches) {
    result.low_texture = true;
    return result;
  }
  std::sort(mutual.begin(), mutual.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  result.matches.reserve(mutual.size());
  for (const auto& [distance, i] : mutual) {
    const int j = forward[static_cast<std::size_t>(i)].first;
    result.matches.push_back({prev.points[static_cast<std::size_t>(i)], cur.points[static_cast<std::size_t>(j)],
                              static_cast<double>(distance)});
  }
  return result;
}

MatchResult detect_and_match(const Frame& prev, const Frame& cur, int max_features) {
  if (prev.width != cur.width || prev.height != cur.height) {
    throw ParameterError("detect_and_match: frames differ in size");
  }
  if (max_features < 50) throw ParameterError("max_features must be at least 50");
  return match_features(extract_features(prev, max_features), extract_features(cur, max_features), max_features);
}

// --- partition -----------------------------------------------------------------

FalsePartition partition_false(std::span<const Correspondence> matches, double false_limit) {
  if (!(false_limit > 0.0)) throw ParameterError("false_limit must be positive");
  FalsePartition out;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    (matches[k].displacement() > false_limit ? out.false_set : out.candidates).push_back(static_cast<int>(k));
  }
  return out;
}

Eigen::Vector2d apply_homography(const Homography& h, const Eigen::Vector2d& p) {
  return (h * p.homogeneous()).hnormalized();
}

double symmetric_transfer_error(const Homography& h, const Homography& h_inv, const Correspondence& m) {
  const double forward = (apply_homography(h, m.p) - m.q).squaredNorm();
  const double backward = (apply_homography(h_inv, m.q) - m.p).squaredNorm();
  return std::sqrt(0.5 * (forward + backward));
}

namespace {

// Similarity taking the points' centroid to the origin and mean distance to sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

bool well_conditioned(const Homography& h) {
  if (!h.allFinite()) return false;
  const double det = h.determinant();
  return std::abs(det) > 1e-12 && std::abs(h.topLeftCorner<2, 2>().determinant()) > 1e-12;
}

bool collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a, v = c - a;
  return std::abs(u.x() * v.y() - u.y() * v.x()) < 1e-6 * std::max(1.0, u.squaredNorm() + v.squaredNorm());
}

bool degenerate_sample(const std::array<Eigen::Vector2d, 4>& pts) {
  return collinear(pts[0], pts[1], pts[2]) || collinear(pts[0], pts[1], pts[3]) ||
         collinear(pts[0], pts[2], pts[3]) || collinear(pts[1], pts[2], pts[3]);
}

// Exact homography through four correspondences with h33 fixed at 1.
bool fit_minimal(const std::array<Eigen::Vector2d, 4>& src, const std::array<Eigen::Vector2d, 4>& dst,
                 Homography& out) {
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const auto& s = src[static_cast<std::size_t>(i)];
    const auto& d = dst[static_cast<std::size_t>(i)];
    a.row(2 * i) << s.x(), s.y(), 1, 0, 0, 0, -d.x() * s.x(), -d.x() * s.y();
    a.row(2 * i + 1) << 0, 0, 0, s.x(), s.y(), 1, -d.y() * s.x(), -d.y() * s.y();
    b(2 * i) = d.x();
    b(2 * i + 1) = d.y();
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) return false;
  const Eigen::Matrix<double, 8, 1> hv = lu.solve(b);
  Homography h;
  h << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), 1.0;
  if (!well_conditioned(h)) return false;
  out = h;
  return true;
}

// Inlier count only, with early exit once `needed` can no longer be reached.
std::size_t count_inliers(const Homography& h, std::span<const Correspondence> m, double tol, std::size_t needed) {
  const Homography h_inv = h.inverse();
  std::size_t count = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (count + (m.size() - k) < needed) return count;
    if (symmetric_transfer_error(h, h_inv, m[k]) < tol) ++count;
  }
  return count;
}

std::vector<int> inliers_of(const Homography& h, std::span<const Correspondence> m, double tol) {
  std::vector<int> out;
  const Homography h_inv = h.inverse();
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (symmetric_transfer_error(h, h_inv, m[k]) < tol) out.push_back(static_cast<int>(k));
  }
  return out;
}

}  // namespace

bool fit_homography_dlt(std::span<const Eigen::Vector2d> src, std::span<const Eigen::Vector2d> dst,
                        Homography& out) {
  if (src.size() != dst.size() || src.size() < 4) return false;
  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);
  const auto n = static_cast<Eigen::Index>(src.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d s = (ts * src[static_cast<std::size_t>(i)].homogeneous()).hnormalized();
    const Eigen::Vector2d d = (td * dst[static_cast<std::size_t>(i)].homogeneous()).hnormalized();
    a.row(2 * i) << -s.x(), -s.y(), -1, 0, 0, 0, d.x() * s.x(), d.x() * s.y(), d.x();
    a.row(2 * i + 1) << 0, 0, 0, -s.x(), -s.y(), -1, d.y() * s.x(), d.y() * s.y(), d.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 1> hv = svd.matrixV().col(8);
  Homography hn;
  hn << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
  Homography h = td.inverse() * hn * ts;
  if (!h.allFinite() || std::abs(h(2, 2)) < 1e-12) return false;
  h /= h(2, 2);
  if (!well_conditioned(h)) return false;
  out = h;
  return true;
}

RansacResult ransac_homography(std::span<const Correspondence> candidates, const RansacOptions& options) {
  RansacResult result;
  const int n = static_cast<int>(candidates.size());
  if (n < 4) return result;

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::size_t best_count = 0;
  Homography best = Homography::Identity();
  for (int iter = 0; iter < options.iterations; ++iter) {
    std::array<int, 4> idx{};
    for (int s = 0; s < 4; ++s) {
      int v;
      do {
        v = pick(rng);
      } while (std::find(idx.begin(), idx.begin() + s, v) != idx.begin() + s);
      idx[static_cast<std::size_t>(s)] = v;
    }
    std::array<Eigen::Vector2d, 4> src, dst;
    for (int s = 0; s < 4; ++s) {
      src[static_cast<std::size_t>(s)] = candidates[static_cast<std::size_t>(idx[static_cast<std::size_t>(s)])].p;
      dst[static_cast<std::size_t>(s)] = candidates[static_cast<std::size_t>(idx[static_cast<std::size_t>(s)])].q;
    }
    if (degenerate_sample(src) || degenerate_sample(dst)) continue;
    Homography h;
    if (!fit_minimal(src, dst, h)) continue;
    const std::size_t count = count_inliers(h, candidates, options.inlier_tol, best_count + 1);
    if (count > best_count) {
      best_count = count;
      best = h;
    }
  }
  if (best_count < 4) return result;
  const std::vector<int> best_inliers = inliers_of(best, candidates, options.inlier_tol);

  std::vector<Eigen::Vector2d> src, dst;
  for (int k : best_inliers) {
    src.push_back(candidates[static_cast<std::size_t>(k)].p);
    dst.push_back(candidates[static_cast<std::size_t>(k)].q);
  }
  Homography refit;
  if (!fit_homography_dlt(src, dst, refit)) return result;
  result.homography = refit;
  result.inliers = inliers_of(refit, candidates, options.inlier_tol);
  result.camera_model = true;
  return result;
}

std::vector<int> hand_correspondences(std::span<const int> candidates, std::span<const int> camera) {
  std::vector<int> r(candidates.begin(), candidates.end());
  std::vector<int> c(camera.begin(), camera.end());
  std::sort(r.begin(), r.end());
  std::sort(c.begin(), c.end());
  std::vector<int> out;
  std::set_difference(r.begin(), r.end(), c.begin(), c.end(), std::back_inserter(out));
  return out;
}

MotionPartition partition_motion(std::vector<Correspondence> matches, double false_limit,
                                 const RansacOptions& options) {
  MotionPartition part;
  part.all = std::move(matches);
  auto split = partition_false(part.all, false_limit);
  part.false_set = std::move(split.false_set);
  part.candidates = std::move(split.candidates);

  std::vector<Correspondence> cand;
  cand.reserve(part.candidates.size());
  for (int k : part.candidates) cand.push_back(part.all[static_cast<std::size_t>(k)]);
  const RansacResult fit = ransac_homography(cand, options);
  part.homography = fit.homography;
  part.camera_model = fit.camera_model;
  for (int local : fit.inliers) part.camera.push_back(part.candidates[static_cast<std::size_t>(local)]);
  part.hand = hand_correspondences(part.candidates, part.camera);
  return part;
}

// --- statistics ------------------------------------------------------------------

namespace {

double median_of(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

double median_displacement(std::span<const std::vector<Correspondence>> per_pair) {
  std::vector<double> d;
  for (const auto& pair : per_pair) {
    for (const auto& m : pair) d.push_back(m.displacement());
  }
  if (d.empty()) throw InputError("degenerate video: no correspondences in any frame pair");
  return median_of(std::move(d));
}

double mean_hand_count(std::span<const std::size_t> per_pair_counts) {
  if (per_pair_counts.empty()) return 0.0;
  double sum = 0.0;
  for (auto c : per_pair_counts) sum += static_cast<double>(c);
  return sum / static_cast<double>(per_pair_counts.size());
}

VideoStatistics compute_video_statistics(std::span<const std::vector<Correspondence>> per_pair,
                                         const RansacOptions& options) {
  VideoStatistics stats;
  stats.displacement_median = median_displacement(per_pair);
  stats.false_limit = kFalseLimitPerMedian * stats.displacement_median;
  std::vector<std::size_t> counts;
  counts.reserve(per_pair.size());
  for (const auto& pair : per_pair) {
    counts.push_back(partition_motion(pair, effective_false_limit(stats), options).hand.size());
  }
  stats.mean_hand_matches = mean_hand_count(counts);
  return stats;
}

double StreamingStatistics::observe_matches(std::span<const Correspondence> matches) {
  if (!frozen()) {
    for (const auto& m : matches) displacements_.push_back(m.displacement());
    if (!displacements_.empty()) displacement_median_ = median_of(displacements_);
    ++pairs_;
    if (frozen()) displacements_ = {};
  }
  return kFalseLimitPerMedian * displacement_median_;
}

double StreamingStatistics::observe_hand_count(std::size_t count) {
  if (hand_pairs_ < warmup_) {
    hand_sum_ += static_cast<double>(count);
    ++hand_pairs_;
  }
  return hand_pairs_ > 0 ? hand_sum_ / hand_pairs_ : 0.0;
}

VideoStatistics StreamingStatistics::current() const {
  VideoStatistics s;
  s.displacement_median = displacement_median_;
  s.false_limit = kFalseLimitPerMedian * displacement_median_;
  s.mean_hand_matches = hand_pairs_ > 0 ? hand_sum_ / hand_pairs_ : 0.0;
  return s;
}

}  // namespace egohand
