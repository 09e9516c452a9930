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
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "egohand/imaging.hpp"
#include "egohand/seeding.hpp"
#include "egohand/superpixel.hpp"

namespace egohand {

// Fusion weights for contrast, location, position consistency and appearance continuity.
struct CueWeights {
  double contrast = 0.3;
  double location = 0.2;
  double position = 0.2;
  double appearance = 0.3;
};

/// Superpixels whose best contrast against every seed falls below this are rejected.
inline constexpr double kEarlyRejectContrast = 0.5;

/// KL(p||q) + KL(q||p) with natural logarithms, written as sum (p - q)(ln p - ln q).
/// Both arguments must be strictly positive.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar symmetric_kl(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q) {
  return ((p.array() - q.array()) * (p.array().log() - q.array().log())).sum();
}

/// Contrast cue: exp(-symmetric KL) between a superpixel and a seed histogram.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar contrast_score(const Eigen::MatrixBase<DerivedP>& histogram,
                                         const Eigen::MatrixBase<DerivedQ>& seed_histogram) {
  return std::exp(-symmetric_kl(histogram, seed_histogram));
}

/// Appearance-continuity cue; same form as the contrast cue, against an appearance model.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar appearance_continuity_score(const Eigen::MatrixBase<DerivedP>& histogram,
                                                      const Eigen::MatrixBase<DerivedQ>& model) {
  return std::exp(-symmetric_kl(histogram, model));
}

/// Location cue: exp(-|centroid - c_u| / l), l the frame diagonal.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar location_score(const Eigen::MatrixBase<DerivedA>& centroid,
                                         const Eigen::MatrixBase<DerivedB>& c_u, typename DerivedA::Scalar diagonal) {
  return std::exp(-(centroid - c_u).norm() / diagonal);
}

/// Position-consistency cue against one previous-frame hand center. Decays with distance,
/// so that maximizing over previous hands favors the nearest one.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar position_consistency_score(const Eigen::MatrixBase<DerivedA>& centroid,
                                                     const Eigen::MatrixBase<DerivedB>& prev_center,
                                                     typename DerivedA::Scalar diagonal) {
  return std::exp(-(centroid - prev_center).norm() / diagonal);
}

struct SeedCue {
  int id = -1;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  Histogram histogram = Histogram::Constant(1.0 / kHistogramBins);
};

// Everything the fused score needs for one frame. Frame-static, so scores can be cached.
struct ScoringContext {
  std::vector<SeedCue> seeds;
  std::vector<Eigen::Vector2d> prev_hand_centers;  // empty after a no-hand frame
  std::vector<Histogram> models;                   // appearance models at t-1
  double diagonal = 1.0;
  CueWeights weights;
  bool prev_frame_no_hand = true;
  bool early_rejection = true;
};

ScoringContext make_scoring_context(const SuperpixelMap& map, const SeedSet& seeds,
                                    std::vector<Eigen::Vector2d> prev_hand_centers, std::vector<Histogram> models,
                                    bool prev_frame_no_hand, bool early_rejection = true);

struct FusedScore {
  double value = 0.0;
  double joint = 0.0;       // max over seeds of the weighted contrast plus proximity
  double position = 0.0;    // weighted best position consistency, or 0
  double appearance = 0.0;  // weighted best model similarity, or 0
  double best_contrast = 0.0;
  int best_seed = -1;       // index into ctx.seeds attaining `joint`
};

/// Weighted fusion of the four cues for one superpixel. Throws ParameterError when the
/// context has no seeds.
FusedScore fused_score(const Histogram& histogram, const Eigen::Vector2d& centroid, const ScoringContext& ctx);
FusedScore fused_score(const SuperpixelMap& map, int id, const ScoringContext& ctx);

/// True iff the best contrast against every seed is below 0.5.
bool early_reject(const Histogram& histogram, const ScoringContext& ctx);
bool early_reject(const SuperpixelMap& map, int id, const ScoringContext& ctx);

// Lazily evaluated, cached per-superpixel scores for one frame. When early rejection is
// enabled, a superpixel failing the contrast test is reported as std::nullopt and its
// remaining cues are never computed.
class SuperpixelScorer {
 public:
  SuperpixelScorer(const SuperpixelMap& map, const ScoringContext& ctx);

  std::optional<double> operator()(int id);

  std::int64_t contrast_evaluations() const { return contrast_evaluations_; }
  std::int64_t full_evaluations() const { return full_evaluations_; }
  std::int64_t rejected() const { return rejected_; }

 private:
  const SuperpixelMap& map_;
  const ScoringContext& ctx_;
  std::vector<std::uint8_t> state_;  // 0 unknown, 1 scored, 2 rejected
  std::vector<double> score_;
  std::int64_t contrast_evaluations_ = 0;
  std::int64_t full_evaluations_ = 0;
  std::int64_t rejected_ = 0;
};

}  // namespace egohand
