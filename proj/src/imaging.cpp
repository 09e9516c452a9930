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

#include "egohand/imaging.hpp"

#include <algorithm>
#include <cstdio>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "egohand/errors.hpp"

namespace fs = std::filesystem;

namespace egohand {

Frame make_frame(std::int64_t index, int width, int height) {
  if (width < kMinFrameSide || height < kMinFrameSide) {
    throw ParameterError("frame must be at least 64x64, got " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  Frame f;
  f.index = index;
  f.width = width;
  f.height = height;
  f.pixels = RgbPixels::Zero(f.pixel_count(), 3);
  return f;
}

void validate_frame(const Frame& frame) {
  if (frame.width < kMinFrameSide || frame.height < kMinFrameSide) {
    throw ParameterError("frame must be at least 64x64");
  }
  if (frame.pixels.rows() != frame.pixel_count()) {
    throw ParameterError("frame buffer size does not match its geometry");
  }
}

HsvFrame rgb_to_hsv(const Frame& frame) {
  HsvFrame out;
  out.width = frame.width;
  out.height = frame.height;
  out.pixels.resize(frame.pixels.rows(), 3);
  for (Eigen::Index i = 0; i < frame.pixels.rows(); ++i) {
    out.pixels.row(i) =
        rgb_to_hsv_pixel<float>(frame.pixels(i, 0), frame.pixels(i, 1), frame.pixels(i, 2)).transpose();
  }
  return out;
}

BinImage compute_bin_image(const HsvFrame& hsv) {
  BinImage bins(hsv.pixels.rows(), 3);
  for (Eigen::Index i = 0; i < hsv.pixels.rows(); ++i) {
    bins.row(i) = histogram_bins<float>(hsv.pixels(i, 0), hsv.pixels(i, 1), hsv.pixels(i, 2)).transpose();
  }
  return bins;
}

Histogram smooth_histogram(const BinCounts& counts, double floor_mass) {
  const double total = counts.sum();
  if (!(total > 0.0)) throw ParameterError("histogram of an empty region");
  Histogram h = counts / total;
  h.array() += floor_mass;
  return h / h.sum();
}

Histogram region_histogram(const HsvFrame& hsv, std::span<const PixelCoord> pixels, double floor_mass) {
  if (pixels.empty()) throw ParameterError("region_histogram: empty pixel set");
  BinCounts counts = BinCounts::Zero();
  for (const PixelCoord& p : pixels) {
    if (p.x() < 0 || p.y() < 0 || p.x() >= hsv.width || p.y() >= hsv.height) {
      throw ParameterError("region_histogram: pixel outside the frame");
    }
    const auto px = hsv.at(p.x(), p.y());
    const auto b = histogram_bins<float>(px(0), px(1), px(2));
    counts(b(0)) += 1.0;
    counts(b(1)) += 1.0;
    counts(b(2)) += 1.0;
  }
  return smooth_histogram(counts, floor_mass);
}

// --- I/O ---------------------------------------------------------------------

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm";
}

std::string expand_pattern(const std::string& pattern, int i) {
  std::vector<char> buf(pattern.size() + 32);
  std::snprintf(buf.data(), buf.size(), pattern.c_str(), i);
  return buf.data();
}

}  // namespace

std::vector<fs::path> list_frame_files(const fs::path& source) {
  std::vector<fs::path> files;
  const std::string text = source.string();
  if (text.find('%') != std::string::npos) {
    int start = fs::exists(expand_pattern(text, 0)) ? 0 : 1;
    for (int i = start;; ++i) {
      fs::path p = expand_pattern(text, i);
      if (!fs::exists(p)) break;
      files.push_back(p);
    }
    if (files.empty()) throw InputError("no frames match pattern " + text);
    return files;
  }
  if (!fs::exists(source)) throw InputError("input not found: " + text);
  if (!fs::is_directory(source)) throw InputError("input is not a directory: " + text);
  for (const auto& entry : fs::directory_iterator(source)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  if (files.empty()) throw InputError("no frames in " + text);
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

Frame read_frame(const fs::path& path, std::int64_t index) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw InputError("cannot decode image " + path.string());
  if (bgr.cols < kMinFrameSide || bgr.rows < kMinFrameSide) {
    throw InputError("image smaller than 64x64: " + path.string());
  }
  Frame f = make_frame(index, bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      f.at(x, y) << row[x][2], row[x][1], row[x][0];
    }
  }
  return f;
}

std::vector<Frame> load_frame_sequence(const fs::path& source) {
  const auto files = list_frame_files(source);
  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    Frame f = read_frame(files[i], static_cast<std::int64_t>(i));
    if (!frames.empty() && (f.width != frames.front().width || f.height != frames.front().height)) {
      throw InputError("dimension mismatch in " + files[i].string() + ": " + std::to_string(f.width) + "x" +
                       std::to_string(f.height) + " vs " + std::to_string(frames.front().width) + "x" +
                       std::to_string(frames.front().height));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_frame_png(const Frame& frame, const fs::path& path) {
  cv::Mat bgr(frame.height, frame.width, CV_8UC3);
  for (int y = 0; y < frame.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < frame.width; ++x) {
      const auto px = frame.at(x, y);
      row[x] = cv::Vec3b(px(2), px(1), px(0));
    }
  }
  if (!cv::imwrite(path.string(), bgr)) throw InputError("cannot write " + path.string());
}

BinaryMask read_mask(const fs::path& path) {
  cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (gray.empty()) throw InputError("cannot decode mask " + path.string());
  BinaryMask mask(gray.rows, gray.cols);
  for (int y = 0; y < gray.rows; ++y) {
    const auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) mask(y, x) = row[x] >= 128 ? 1 : 0;
  }
  return mask;
}

void write_mask_png(const BinaryMask& mask, const fs::path& path) {
  cv::Mat gray(static_cast<int>(mask.rows()), static_cast<int>(mask.cols()), CV_8UC1);
  for (int y = 0; y < gray.rows; ++y) {
    auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) row[x] = mask(y, x) ? 255 : 0;
  }
  if (!cv::imwrite(path.string(), gray)) throw InputError("cannot write " + path.string());
}

void write_label_png(const Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& labels,
                     const fs::path& path) {
  cv::Mat img(static_cast<int>(labels.rows()), static_cast<int>(labels.cols()), CV_16UC1);
  for (int y = 0; y < img.rows; ++y) {
    auto* row = img.ptr<std::uint16_t>(y);
    for (int x = 0; x < img.cols; ++x) row[x] = static_cast<std::uint16_t>(std::clamp(labels(y, x), 0, 65535));
  }
  if (!cv::imwrite(path.string(), img)) throw InputError("cannot write " + path.string());
}

}  // namespace egohand
