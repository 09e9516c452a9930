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
#include <string>
#include <vector>

#include "egohand/growing.hpp"
#include "egohand/imaging.hpp"
#include "egohand/scoring.hpp"

namespace egohand {

struct TrackerParams {
  double decay = 0.4;                // weight of the new observation in the model update
  double spawn_ratio = 3.0;
  double consistency_tolerance = 0.2;  // L2 between birth and current histogram
  int consistency_frames = 10;
  std::int64_t expiry_window = 500;
  double match_radius_fraction = 0.125;  // pending-candidate matching radius, fraction of the diagonal
};

struct AppearanceModel {
  int id = 0;
  Histogram histogram = Histogram::Constant(1.0 / kHistogramBins);
  std::int64_t created = 0;
  std::int64_t last_assigned = 0;
};

// A distinctive component waiting to prove itself stable before becoming a model.
struct PendingModel {
  Histogram histogram = Histogram::Constant(1.0 / kHistogramBins);  // at birth
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();               // latest observation
  std::int64_t born = 0;
  int consistent = 0;
};

struct AppearanceModelPool {
  std::vector<AppearanceModel> models;
  std::vector<PendingModel> pending;
  int next_id = 0;

  bool empty() const { return models.empty(); }
  std::vector<Histogram> histograms() const;
};

struct ComponentObservation {
  Histogram histogram = Histogram::Constant(1.0 / kHistogramBins);
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
};

std::vector<ComponentObservation> observations(const HandDetectionResult& result);

struct Assignment {
  std::vector<int> model;          // index into pool.models per component, -1 if none
  std::vector<double> divergence;  // symmetric KL to that model (0 when the pool is empty)
  std::vector<bool> distinctive;   // spawn candidates
  double mean_divergence = 0.0;              // mean divergence over all components
};

/// Nearest model by symmetric KL for every component, plus the spawn gate. A component is
/// distinctive when the pool is empty, or when its divergence is at least spawn_ratio times
/// the mean divergence of the other components; a lone component is never distinctive.
/// Distinctive components carry model = -1.
Assignment assign_components(std::span<const ComponentObservation> components, const AppearanceModelPool& pool,
                             const TrackerParams& params = {});

/// a <- decay * observation + (1 - decay) * a, renormalized to unit sum.
template <typename DerivedA, typename DerivedB>
HistogramT<typename DerivedA::Scalar> decay_update(const Eigen::MatrixBase<DerivedA>& model,
                                                   const Eigen::MatrixBase<DerivedB>& observation,
                                                   typename DerivedA::Scalar decay) {
  HistogramT<typename DerivedA::Scalar> out = decay * observation + (1 - decay) * model;
  return out / out.sum();
}

/// Moves every model that received components toward the mean of its components and
/// stamps last_assigned = t. Models without components are left as they are.
void update_models(AppearanceModelPool& pool, std::span<const ComponentObservation> components,
                   const Assignment& assignment, std::int64_t t, const TrackerParams& params = {});

/// Advances pending candidates against this frame's components (nearest centroid within
/// the match radius and L2 within tolerance, else discarded), promotes candidates that
/// reached consistency_frames, then registers distinctive components not already claimed by
/// a candidate as new candidates born at t.
void advance_pending(AppearanceModelPool& pool, std::span<const ComponentObservation> components,
                     const Assignment& assignment, std::int64_t t, double diagonal, const TrackerParams& params = {});

/// Removes models with t - last_assigned > expiry_window.
void expire_models(AppearanceModelPool& pool, std::int64_t t, const TrackerParams& params = {});

struct PreviousHand {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  std::vector<int> superpixels;
};

struct TrackerState {
  AppearanceModelPool pool;
  std::vector<PreviousHand> prev_hands;
  bool prev_frame_no_hand = true;
  std::int64_t t = 0;
  double diagonal = 1.0;
  TrackerParams params;

  std::vector<Eigen::Vector2d> prev_centers() const;
};

TrackerState make_tracker_state(int width, int height, const TrackerParams& params = {});

/// Folds frame `result.frame_index` into the state. A NoHand result clears the previous
/// hands and leaves models and candidates as they are; expiry always runs.
void commit_frame(TrackerState& state, const HandDetectionResult& result);

std::string pool_to_json(const AppearanceModelPool& pool);
AppearanceModelPool pool_from_json(const std::string& text);

}  // namespace egohand
