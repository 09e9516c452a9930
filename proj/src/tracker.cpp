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

#include "egohand/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "egohand/errors.hpp"

namespace egohand {

std::vector<Histogram> AppearanceModelPool::histograms() const {
  std::vector<Histogram> out;
  out.reserve(models.size());
  for (const auto& m : models) out.push_back(m.histogram);
  return out;
}

std::vector<ComponentObservation> observations(const HandDetectionResult& result) {
  std::vector<ComponentObservation> out;
  out.reserve(result.components.size());
  for (const auto& c : result.components) out.push_back({c.histogram, c.centroid});
  return out;
}

Assignment assign_components(std::span<const ComponentObservation> components, const AppearanceModelPool& pool,
                             const TrackerParams& params) {
  const std::size_t n = components.size();
  Assignment a;
  a.model.assign(n, -1);
  a.divergence.assign(n, 0.0);
  a.distinctive.assign(n, false);
  if (n == 0) return a;
  if (pool.empty()) {
    a.distinctive.assign(n, true);
    return a;
  }
  std::vector<int> nearest(n, -1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < pool.models.size(); ++m) {
      const double d = symmetric_kl(components[i].histogram, pool.models[m].histogram);
      if (d < best) {
        best = d;
        nearest[i] = static_cast<int>(m);
      }
    }
    a.divergence[i] = best;
    total += best;
  }
  a.mean_divergence = total / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool distinctive = false;
    if (n > 1) {
      const double others = (total - a.divergence[i]) / static_cast<double>(n - 1);
      distinctive = others > 0.0 ? a.divergence[i] / others >= params.spawn_ratio : a.divergence[i] > 0.0;
    }
    a.distinctive[i] = distinctive;
    a.model[i] = distinctive ? -1 : nearest[i];
  }
  return a;
}

void update_models(AppearanceModelPool& pool, std::span<const ComponentObservation> components,
                   const Assignment& assignment, std::int64_t t, const TrackerParams& params) {
  for (std::size_t m = 0; m < pool.models.size(); ++m) {
    Histogram sum = Histogram::Zero();
    int count = 0;
    for (std::size_t i = 0; i < components.size(); ++i) {
      if (assignment.model[i] == static_cast<int>(m)) {
        sum += components[i].histogram;
        ++count;
      }
    }
    if (count == 0) continue;
    auto& model = pool.models[m];
    model.histogram = decay_update(model.histogram, sum / count, params.decay);
    model.last_assigned = t;
  }
}

void advance_pending(AppearanceModelPool& pool, std::span<const ComponentObservation> components,
                     const Assignment& assignment, std::int64_t t, double diagonal, const TrackerParams& params) {
  const double radius = params.match_radius_fraction * diagonal;
  std::vector<bool> claimed(components.size(), false);
  std::vector<PendingModel> survivors;
  for (auto& cand : pool.pending) {
    if (cand.born >= t) {
      survivors.push_back(cand);
      continue;
    }
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < components.size(); ++i) {
      const double d = (components[i].centroid - cand.centroid).norm();
      if (d <= radius && d < best_dist) {
        best_dist = d;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) continue;
    const auto& obs = components[static_cast<std::size_t>(best)];
    claimed[static_cast<std::size_t>(best)] = true;
    if ((obs.histogram - cand.histogram).norm() > params.consistency_tolerance) continue;
    cand.centroid = obs.centroid;
    if (++cand.consistent >= params.consistency_frames) {
      pool.models.push_back({pool.next_id++, cand.histogram, t, t});
    } else {
      survivors.push_back(cand);
    }
  }
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (assignment.distinctive[i] && !claimed[i]) {
      survivors.push_back({components[i].histogram, components[i].centroid, t, 0});
    }
  }
  pool.pending = std::move(survivors);
}

void expire_models(AppearanceModelPool& pool, std::int64_t t, const TrackerParams& params) {
  std::erase_if(pool.models, [&](const AppearanceModel& m) { return t - m.last_assigned > params.expiry_window; });
}

std::vector<Eigen::Vector2d> TrackerState::prev_centers() const {
  std::vector<Eigen::Vector2d> out;
  out.reserve(prev_hands.size());
  for (const auto& h : prev_hands) out.push_back(h.centroid);
  return out;
}

TrackerState make_tracker_state(int width, int height, const TrackerParams& params) {
  if (width <= 0 || height <= 0) throw ParameterError("tracker needs positive frame dimensions");
  TrackerState s;
  s.diagonal = std::hypot(static_cast<double>(width), static_cast<double>(height));
  s.params = params;
  return s;
}

void commit_frame(TrackerState& state, const HandDetectionResult& result) {
  const std::int64_t t = result.frame_index;
  state.t = t;
  state.prev_hands.clear();
  for (const auto& c : result.components) state.prev_hands.push_back({c.centroid, c.superpixels});
  state.prev_frame_no_hand = result.components.empty();
  if (!state.prev_frame_no_hand) {
    const auto obs = observations(result);
    const Assignment a = assign_components(obs, state.pool, state.params);
    update_models(state.pool, obs, a, t, state.params);
    advance_pending(state.pool, obs, a, t, state.diagonal, state.params);
  }
  expire_models(state.pool, t, state.params);
}

namespace {

nlohmann::json histogram_json(const Histogram& h) {
  return nlohmann::json(std::vector<double>(h.data(), h.data() + h.size()));
}

Histogram histogram_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != kHistogramBins) throw InputError("pool json: histogram must have 16 bins");
  Histogram h;
  for (int i = 0; i < kHistogramBins; ++i) h[i] = v[static_cast<std::size_t>(i)];
  return h;
}

}  // namespace

std::string pool_to_json(const AppearanceModelPool& pool) {
  nlohmann::json j;
  j["next_id"] = pool.next_id;
  j["models"] = nlohmann::json::array();
  for (const auto& m : pool.models) {
    j["models"].push_back({{"id", m.id},
                           {"created", m.created},
                           {"last_assigned", m.last_assigned},
                           {"histogram", histogram_json(m.histogram)}});
  }
  j["pending"] = nlohmann::json::array();
  for (const auto& p : pool.pending) {
    j["pending"].push_back({{"born", p.born},
                            {"consistent", p.consistent},
                            {"centroid", {p.centroid.x(), p.centroid.y()}},
                            {"histogram", histogram_json(p.histogram)}});
  }
  return j.dump();
}

AppearanceModelPool pool_from_json(const std::string& text) {
  AppearanceModelPool pool;
  try {
    const auto j = nlohmann::json::parse(text);
    pool.next_id = j.at("next_id").get<int>();
    for (const auto& m : j.at("models")) {
      pool.models.push_back({m.at("id").get<int>(), histogram_from(m.at("histogram")),
                             m.at("created").get<std::int64_t>(), m.at("last_assigned").get<std::int64_t>()});
    }
    for (const auto& p : j.at("pending")) {
      const auto c = p.at("centroid").get<std::vector<double>>();
      if (c.size() != 2) throw InputError("pool json: centroid must have 2 entries");
      pool.pending.push_back({histogram_from(p.at("histogram")), Eigen::Vector2d(c[0], c[1]),
                              p.at("born").get<std::int64_t>(), p.at("consistent").get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("pool json: ") + e.what());
  }
  return pool;
}

}  // namespace egohand
