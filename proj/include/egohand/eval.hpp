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

#include <filesystem>
#include <string>
#include <vector>

#include "egohand/imaging.hpp"

namespace egohand {

struct MaskScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Pixel precision, recall and their harmonic mean. Two empty masks score 1 everywhere;
/// an empty mask against a nonempty one scores 0. Throws ParameterError on a size mismatch.
MaskScore f_score(const BinaryMask& predicted, const BinaryMask& truth);

/// Intersection over union; 1 for two empty masks. Throws ParameterError on a size mismatch.
double iou(const BinaryMask& predicted, const BinaryMask& truth);

struct FrameMetrics {
  std::string frame;  // file stem
  MaskScore score;
  double iou = 0.0;
};

struct SequenceMetrics {
  std::vector<FrameMetrics> frames;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f = 0.0;
  double mean_iou = 0.0;
};

/// Unweighted per-frame means.
SequenceMetrics summarize(std::vector<FrameMetrics> frames);

/// Scores every truth mask against the prediction with the same file stem.
/// Throws InputError when a directory is missing or empty, a prediction is missing
/// (naming it), or the sizes disagree.
SequenceMetrics evaluate_sequence(const std::filesystem::path& predictions, const std::filesystem::path& truth);

/// CSV with header frame,precision,recall,f,iou.
void write_metrics_csv(const SequenceMetrics& metrics, const std::filesystem::path& path);
std::string metrics_csv(const SequenceMetrics& metrics);

struct CategoryMetrics {
  std::string category;
  SequenceMetrics metrics;
};

/// CSV with header category,frames,precision,recall,f,iou holding per-category means.
std::string category_csv(const std::vector<CategoryMetrics>& categories);

}  // namespace egohand
