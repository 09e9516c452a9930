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

#include "egohand/scoring.hpp"

#include <algorithm>

#include "egohand/errors.hpp"

namespace egohand {
namespace {

// Contrast against every seed; returns the maximum.
double best_contrast(const Histogram& histogram, const ScoringContext& ctx, std::vector<double>& contrast) {
  contrast.resize(ctx.seeds.size());
  double best = 0.0;
  for (std::size_t u = 0; u < ctx.seeds.size(); ++u) {
    contrast[u] = contrast_score(histogram, ctx.seeds[u].histogram);
    best = std::max(best, contrast[u]);
  }
  return best;
}

// Remaining cues given precomputed contrast values.
FusedScore complete_score(const Eigen::Vector2d& centroid, const Histogram& histogram, const ScoringContext& ctx,
                          const std::vector<double>& contrast, double contrast_max) {
  const CueWeights& w = ctx.weights;
  FusedScore out;
  out.best_contrast = contrast_max;
  out.joint = -1.0;
  for (std::size_t u = 0; u < ctx.seeds.size(); ++u) {
    const double joint =
        w.contrast * contrast[u] + w.location * location_score(centroid, ctx.seeds[u].centroid, ctx.diagonal);
    if (joint > out.joint) {
      out.joint = joint;
      out.best_seed = static_cast<int>(u);
    }
  }
  if (!ctx.prev_frame_no_hand && !ctx.prev_hand_centers.empty()) {
    double best = 0.0;
    for (const auto& c : ctx.prev_hand_centers)
      best = std::max(best, position_consistency_score(centroid, c, ctx.diagonal));
    out.position = w.position * best;
  }
  if (!ctx.models.empty()) {
    double best = 0.0;
    for (const auto& m : ctx.models) best = std::max(best, appearance_continuity_score(histogram, m));
    out.appearance = w.appearance * best;
  }
  out.value = out.joint + out.position + out.appearance;
  return out;
}

}  // namespace

ScoringContext make_scoring_context(const SuperpixelMap& map, const SeedSet& seeds,
                                    std::vector<Eigen::Vector2d> prev_hand_centers, std::vector<Histogram> models,
                                    bool prev_frame_no_hand, bool early_rejection) {
  ScoringContext ctx;
  for (int id : seeds.ids) {
    const auto& rec = map.records[static_cast<std::size_t>(id)];
    ctx.seeds.push_back({id, rec.centroid, rec.histogram});
  }
  ctx.prev_hand_centers = std::move(prev_hand_centers);
  ctx.models = std::move(models);
  ctx.diagonal = std::hypot(static_cast<double>(map.width), static_cast<double>(map.height));
  ctx.prev_frame_no_hand = prev_frame_no_hand;
  ctx.early_rejection = early_rejection;
  return ctx;
}

FusedScore fused_score(const Histogram& histogram, const Eigen::Vector2d& centroid, const ScoringContext& ctx) {
  if (ctx.seeds.empty()) throw ParameterError("fused_score requires at least one seed");
  std::vector<double> contrast;
  const double best = best_contrast(histogram, ctx, contrast);
  return complete_score(centroid, histogram, ctx, contrast, best);
}

FusedScore fused_score(const SuperpixelMap& map, int id, const ScoringContext& ctx) {
  const auto& rec = map.records.at(static_cast<std::size_t>(id));
  return fused_score(rec.histogram, rec.centroid, ctx);
}

bool early_reject(const Histogram& histogram, const ScoringContext& ctx) {
  if (ctx.seeds.empty()) throw ParameterError("early_reject requires at least one seed");
  std::vector<double> contrast;
  return best_contrast(histogram, ctx, contrast) < kEarlyRejectContrast;
}

bool early_reject(const SuperpixelMap& map, int id, const ScoringContext& ctx) {
  return early_reject(map.records.at(static_cast<std::size_t>(id)).histogram, ctx);
}

SuperpixelScorer::SuperpixelScorer(const SuperpixelMap& map, const ScoringContext& ctx)
    : map_(map), ctx_(ctx), state_(static_cast<std::size_t>(map.count()), 0), score_(state_.size(), 0.0) {
  if (ctx.seeds.empty()) throw ParameterError("scorer requires at least one seed");
}

std::optional<double> SuperpixelScorer::operator()(int id) {
  const auto k = static_cast<std::size_t>(id);
  if (state_[k] == 1) return score_[k];
  if (state_[k] == 2) return std::nullopt;

  const auto& rec = map_.records[k];
  std::vector<double> contrast;
  const double best = best_contrast(rec.histogram, ctx_, contrast);
  ++contrast_evaluations_;
  if (ctx_.early_rejection && best < kEarlyRejectContrast) {
    state_[k] = 2;
    ++rejected_;
    return std::nullopt;
  }
  score_[k] = complete_score(rec.centroid, rec.histogram, ctx_, contrast, best).value;
  ++full_evaluations_;
  state_[k] = 1;
  return score_[k];
}

}  // namespace egohand
