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
#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "egohand/imaging.hpp"

namespace egohand {

using Homography = Eigen::Matrix3d;

// A matched keypoint pair across successive frames: p in the previous frame, q in the current one.
struct Correspondence {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  double descriptor_distance = 0.0;

  double displacement() const { return (p - q).norm(); }
};

// Oriented-FAST keypoints with 256-bit rotated-BRIEF descriptors.
struct FeatureSet {
  std::vector<Eigen::Vector2d> points;
  std::vector<std::array<std::uint64_t, 4>> descriptors;
};

struct MatchResult {
  std::vector<Correspondence> matches;
  bool low_texture = false;  // fewer than kMinMatches survived; `matches` is then empty
};

inline constexpr int kMinMatches = 8;

FeatureSet extract_features(const Frame& frame, int max_features);

/// Mutual nearest neighbours under Hamming distance, keeping at most `max_features`
/// pairs (smallest distances first, ties by previous-frame keypoint order).
MatchResult match_features(const FeatureSet& prev, const FeatureSet& cur, int max_features);

/// extract_features on both frames followed by match_features. Throws ParameterError for
/// frames of different size or max_features < 50.
MatchResult detect_and_match(const Frame& prev, const Frame& cur, int max_features);

// --- partition ---------------------------------------------------------------

struct RansacOptions {
  double inlier_tol = 2.0;  // pixels, symmetric transfer error
  int iterations = 500;
  std::uint64_t seed = 0;
};

// Every match, then the false, candidate, camera and hand subsets as index lists into `all`
// (each sorted ascending).
struct MotionPartition {
  std::vector<Correspondence> all;
  std::vector<int> false_set;
  std::vector<int> candidates;
  std::vector<int> camera;
  std::vector<int> hand;
  Homography homography = Homography::Identity();
  bool camera_model = false;  // false: fewer than 4 candidates or no non-degenerate sample
};

struct FalsePartition {
  std::vector<int> false_set;
  std::vector<int> candidates;
};

/// A match is false iff its displacement is strictly greater than false_limit. Throws ParameterError
/// when false_limit <= 0.
FalsePartition partition_false(std::span<const Correspondence> matches, double false_limit);

struct RansacResult {
  Homography homography = Homography::Identity();
  std::vector<int> inliers;  // indices into the input span
  bool camera_model = false;
};

/// Maps p -> H p with the projective division.
Eigen::Vector2d apply_homography(const Homography& h, const Eigen::Vector2d& p);

/// RMS of forward (H p vs q) and backward (H^-1 q vs p) transfer distances.
double symmetric_transfer_error(const Homography& h, const Homography& h_inv, const Correspondence& m);

/// Hartley-normalized DLT over all pairs (at least 4), scaled so H(2,2) = 1.
/// Returns false for degenerate configurations.
bool fit_homography_dlt(std::span<const Eigen::Vector2d> src, std::span<const Eigen::Vector2d> dst,
                        Homography& out);

/// 4-point RANSAC by inlier count, then a DLT refit on the winning inliers; the
/// returned inliers are those of the refit model. Fewer than 4 correspondences yields
/// the identity with no inliers and camera_model = false.
RansacResult ransac_homography(std::span<const Correspondence> candidates, const RansacOptions& options = {});

/// Candidates that are not camera inliers, sorted.
std::vector<int> hand_correspondences(std::span<const int> candidates, std::span<const int> camera);

/// Full partition for one frame pair.
MotionPartition partition_motion(std::vector<Correspondence> matches, double false_limit,
                                 const RansacOptions& options = {});

// --- video statistics --------------------------------------------------------

struct VideoStatistics {
  double displacement_median = 0.0;     // median displacement over the video
  double false_limit = 0.0;  // 10 * displacement_median
  double mean_hand_matches = 0.0;     // mean hand-match count per frame pair
};

inline constexpr double kFalseLimitPerMedian = 10.0;
/// Lower bound on the displacement threshold actually applied, for videos whose median
/// displacement is zero (static camera with pixel-exact keypoints).
inline constexpr double kMinFalseLimit = 1.0;

inline double effective_false_limit(const VideoStatistics& s) { return std::max(s.false_limit, kMinFalseLimit); }

/// Exact median of all displacements (mean of the middle two for an even count).
/// Throws InputError("degenerate video") when there are no correspondences at all.
double median_displacement(std::span<const std::vector<Correspondence>> per_pair);

double mean_hand_count(std::span<const std::size_t> per_pair_counts);

/// Two passes: displacement_median and false_limit over every correspondence, then each pair is partitioned
/// with that false_limit and mean_hand_matches is the mean hand-match count.
VideoStatistics compute_video_statistics(std::span<const std::vector<Correspondence>> per_pair,
                                         const RansacOptions& options = {});

// Running estimate for online use. Until `warmup` pairs have been seen, displacement_median is the
// median of every displacement observed so far and mean_hand_matches the running mean of hand-match counts;
// afterwards both are frozen.
class StreamingStatistics {
 public:
  explicit StreamingStatistics(int warmup = 300) : warmup_(warmup) {}

  /// Adds a pair's displacements (ignored once frozen) and returns the current false_limit.
  double observe_matches(std::span<const Correspondence> matches);
  /// Adds a pair's hand-match count (ignored once frozen) and returns the current mean_hand_matches.
  double observe_hand_count(std::size_t count);

  VideoStatistics current() const;
  bool frozen() const { return pairs_ >= warmup_; }

 private:
  int warmup_;
  int pairs_ = 0;
  int hand_pairs_ = 0;
  std::vector<double> displacements_;
  double displacement_median_ = 0.0;
  double hand_sum_ = 0.0;
};

}  // namespace egohand
