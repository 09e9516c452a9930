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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "egohand/config.hpp"
#include "egohand/eval.hpp"
#include "egohand/growing.hpp"
#include "egohand/imaging.hpp"
#include "egohand/motion.hpp"
#include "egohand/scoring.hpp"
#include "egohand/seeding.hpp"
#include "egohand/superpixel.hpp"
#include "egohand/tracker.hpp"

namespace egohand {

struct DetectorOptions {
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;  // pixels at 640x360, scaled by frame area
  int superpixels = 600;       // at 640x360, scaled by frame area
  double compactness = 10.0;
  int max_features = 1000;
  RansacOptions ransac;
  bool early_rejection = true;

  /// Throws ConfigError for out-of-range values.
  void validate() const;
};

// Matching and motion partition for one frame pair.
struct MotionAnalysis {
  MatchResult matches;
  MotionPartition partition;
  double matching_ms = 0.0;
  double motion_ms = 0.0;
};

MotionAnalysis analyze_motion(const FeatureSet& prev, const FeatureSet& cur, double false_limit,
                              const DetectorOptions& options, std::uint64_t ransac_seed);

// Everything about frame t that does not depend on alpha, beta or the tracker.
struct FrameAnalysis {
  std::int64_t index = 0;
  SuperpixelMap map;
  AdjacencyGraph graph;
  MotionAnalysis motion;
  SeedSet seeds;
  double segmentation_ms = 0.0;
  double seeding_ms = 0.0;
};

FrameAnalysis analyze_frame(const Frame& cur, MotionAnalysis motion, double mean_hand_matches,
                            const DetectorOptions& options);

struct DetectionOutput {
  HandDetectionResult result;
  GrowResult growth;  // empty when there were no seeds
  std::int64_t contrast_evaluations = 0;
  std::int64_t full_evaluations = 0;
  std::int64_t rejected = 0;
  double growing_ms = 0.0;
};

/// Scores, grows and refines from the seeds of `analysis`. No seeds means NoHand without
/// growing. The tracker state is read, not modified.
DetectionOutput detect_from_analysis(const FrameAnalysis& analysis, const TrackerState& state,
                                     const DetectorOptions& options);

/// Whole per-frame pipeline for one consecutive pair under fixed video statistics.
DetectionOutput detect_frame(const Frame& prev, const Frame& cur, const TrackerState& state,
                             const VideoStatistics& stats, const DetectorOptions& options);

BinaryMask hand_mask(const DetectionOutput& output, const FrameAnalysis& analysis);

enum class StatisticsMode { TwoPass, Streaming };

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  DetectorOptions detector;
  StatisticsMode statistics = StatisticsMode::TwoPass;
  int streaming_warmup = 300;
  std::uint64_t seed = 0;
  bool overlay = false;
  bool debug_log = false;

  void validate() const;
};

/// Builds a config from key=value entries (keys as in the CLI flags, '-' and '_'
/// interchangeable). Throws ConfigError on unknown keys or invalid values.
PipelineConfig pipeline_config_from(const KeyValueConfig& values);

struct FrameRecord {
  std::int64_t index = 0;
  std::string name;
  HandPattern pattern = HandPattern::NoHand;
  std::size_t components = 0;
  std::size_t seeds = 0;
  std::size_t hand_correspondences = 0;
};

struct RunSummary {
  std::vector<FrameRecord> frames;
  VideoStatistics statistics;
  double seconds = 0.0;
};

/// Detects hands in every frame of config.input and writes masks/, optional overlay/,
/// frames.jsonl and optional debug.jsonl under config.output. Frame 0 gets an empty mask.
/// Throws InputError on unreadable input (fewer than two frames included).
RunSummary run(const PipelineConfig& config);

struct SweepCell {
  double alpha = 0.0;
  double beta = 0.0;
  double mean_f = 0.0;
  double mean_iou = 0.0;
};

struct SweepResult {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<SweepCell> cells;  // row-major: alpha rows, beta columns

  const SweepCell& at(std::size_t a, std::size_t b) const { return cells[a * betas.size() + b]; }
};

/// One detection run per (alpha, beta) cell over config.input, scored against the masks in
/// `truth`. The front end runs once per frame; all cells advance in lockstep.
SweepResult sweep(const PipelineConfig& config, const std::vector<double>& alphas, const std::vector<double>& betas,
                  const std::filesystem::path& truth);

/// CSV in table layout: alpha rows, two columns per beta. Header "alpha,f_<b1>,iou_<b1>,...".
std::string sweep_csv(const SweepResult& result);

/// Runs detection on <root>/<category>/frames and scores against <root>/<category>/masks
/// for every category directory holding both. Detection outputs go under
/// config.output/<category>. Throws InputError when no category is found.
std::vector<CategoryMetrics> evaluate_dataset(const std::filesystem::path& root, const PipelineConfig& config);

}  // namespace egohand
