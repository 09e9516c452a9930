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

#include "egohand/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "egohand/errors.hpp"

namespace egohand {
namespace {

struct Counts {
  double tp = 0, fp = 0, fn = 0;
};

Counts count(const BinaryMask& predicted, const BinaryMask& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
    throw ParameterError("mask size mismatch: " + std::to_string(predicted.cols()) + "x" +
                         std::to_string(predicted.rows()) + " vs " + std::to_string(truth.cols()) + "x" +
                         std::to_string(truth.rows()));
  }
  const auto p = (predicted != 0);
  const auto t = (truth != 0);
  Counts c;
  c.tp = static_cast<double>((p && t).count());
  c.fp = static_cast<double>((p && !t).count());
  c.fn = static_cast<double>((!p && t).count());
  return c;
}

std::map<std::string, std::filesystem::path> images_by_stem(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::map<std::string, std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext != ".png" && ext != ".pgm" && ext != ".bmp" && ext != ".jpg" && ext != ".jpeg") continue;
    out.emplace(entry.path().stem().string(), entry.path());
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

MaskScore f_score(const BinaryMask& predicted, const BinaryMask& truth) {
  const Counts c = count(predicted, truth);
  const double pred = c.tp + c.fp;
  const double real = c.tp + c.fn;
  if (pred == 0 && real == 0) return {1.0, 1.0, 1.0};
  MaskScore s;
  s.precision = pred > 0 ? c.tp / pred : 0.0;
  s.recall = real > 0 ? c.tp / real : 0.0;
  s.f = c.tp > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

double iou(const BinaryMask& predicted, const BinaryMask& truth) {
  const Counts c = count(predicted, truth);
  const double uni = c.tp + c.fp + c.fn;
  return uni == 0 ? 1.0 : c.tp / uni;
}

SequenceMetrics summarize(std::vector<FrameMetrics> frames) {
  SequenceMetrics m;
  m.frames = std::move(frames);
  if (m.frames.empty()) return m;
  for (const auto& f : m.frames) {
    m.mean_precision += f.score.precision;
    m.mean_recall += f.score.recall;
    m.mean_f += f.score.f;
    m.mean_iou += f.iou;
  }
  const double n = static_cast<double>(m.frames.size());
  m.mean_precision /= n;
  m.mean_recall /= n;
  m.mean_f /= n;
  m.mean_iou /= n;
  return m;
}

SequenceMetrics evaluate_sequence(const std::filesystem::path& predictions, const std::filesystem::path& truth) {
  const auto truth_files = images_by_stem(truth);
  if (truth_files.empty()) throw InputError("no ground-truth masks in " + truth.string());
  const auto pred_files = images_by_stem(predictions);
  std::vector<FrameMetrics> frames;
  for (const auto& [stem, truth_path] : truth_files) {
    const auto it = pred_files.find(stem);
    if (it == pred_files.end()) {
      throw InputError("missing prediction for " + truth_path.filename().string() + " in " + predictions.string());
    }
    const BinaryMask t = read_mask(truth_path);
    const BinaryMask p = read_mask(it->second);
    if (p.rows() != t.rows() || p.cols() != t.cols()) {
      throw InputError("mask size mismatch between " + it->second.string() + " and " + truth_path.string());
    }
    frames.push_back({stem, f_score(p, t), iou(p, t)});
  }
  return summarize(std::move(frames));
}

std::string metrics_csv(const SequenceMetrics& metrics) {
  std::ostringstream out;
  out << "frame,precision,recall,f,iou\n";
  for (const auto& f : metrics.frames) {
    out << f.frame << ',' << fmt(f.score.precision) << ',' << fmt(f.score.recall) << ',' << fmt(f.score.f) << ','
        << fmt(f.iou) << '\n';
  }
  return out.str();
}

void write_metrics_csv(const SequenceMetrics& metrics, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << metrics_csv(metrics);
}

std::string category_csv(const std::vector<CategoryMetrics>& categories) {
  std::ostringstream out;
  out << "category,frames,precision,recall,f,iou\n";
  for (const auto& c : categories) {
    out << c.category << ',' << c.metrics.frames.size() << ',' << fmt(c.metrics.mean_precision) << ','
        << fmt(c.metrics.mean_recall) << ',' << fmt(c.metrics.mean_f) << ',' << fmt(c.metrics.mean_iou) << '\n';
  }
  return out.str();
}

}  // namespace egohand
