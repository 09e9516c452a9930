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

#include "egohand/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "egohand/errors.hpp"

namespace egohand {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct StageTimes {
  double decode = 0, features = 0, matching = 0, motion = 0, segmentation = 0, seeding = 0, growing = 0,
         tracking = 0, output = 0, wall = 0;

  nlohmann::json json() const {
    return {{"decode", decode},     {"features", features}, {"matching", matching},
            {"motion", motion},     {"segmentation", segmentation}, {"seeding", seeding},
            {"growing", growing},   {"tracking", tracking}, {"output", output}};
  }
};

std::uint64_t pair_seed(std::uint64_t seed, std::int64_t t) { return seed + static_cast<std::uint64_t>(t); }

// Produces per-frame analyses in order, under two-pass or streaming statistics.
class FrameSource {
 public:
  struct Item {
    Frame frame;
    std::optional<FrameAnalysis> analysis;  // absent for frame 0
    StageTimes times;
  };

  explicit FrameSource(const PipelineConfig& config) : config_(config), streaming_(config.streaming_warmup) {
    files_ = list_frame_files(config.input);
    if (files_.size() < 2) {
      throw InputError("need at least two frames in " + config.input.string() + ", found " +
                       std::to_string(files_.size()));
    }
    if (config.statistics == StatisticsMode::TwoPass) first_pass();
  }

  std::size_t size() const { return files_.size(); }
  const std::vector<std::filesystem::path>& files() const { return files_; }
  VideoStatistics statistics() const {
    return config_.statistics == StatisticsMode::TwoPass ? stats_ : streaming_.current();
  }
  int width() const { return width_; }
  int height() const { return height_; }

  Item next() {
    const auto wall = Clock::now();
    Item item;
    const auto t = static_cast<std::int64_t>(cursor_);
    auto start = Clock::now();
    item.frame = load(t);
    item.times.decode = ms_since(start);
    if (config_.statistics == StatisticsMode::TwoPass) {
      item.times.decode += decode_ms_[cursor_];
      item.times.features = features_ms_[cursor_];
      if (t > 0) {
        MotionAnalysis motion = std::move(motion_[cursor_ - 1]);
        item.times.matching = motion.matching_ms;
        item.times.motion = motion.motion_ms;
        item.analysis = analyze_frame(item.frame, std::move(motion), stats_.mean_hand_matches, config_.detector);
      }
      item.times.wall = pass1_wall_ms_[cursor_];
    } else {
      start = Clock::now();
      FeatureSet feats = extract_features(item.frame, config_.detector.max_features);
      item.times.features = ms_since(start);
      if (t > 0) {
        start = Clock::now();
        MatchResult matches = match_features(prev_features_, feats, config_.detector.max_features);
        const double matching_ms = ms_since(start);
        start = Clock::now();
        const double false_limit = std::max(streaming_.observe_matches(matches.matches), kMinFalseLimit);
        MotionAnalysis motion;
        motion.matches = std::move(matches);
        RansacOptions ransac = config_.detector.ransac;
        ransac.seed = pair_seed(config_.seed, t);
        motion.partition = partition_motion(motion.matches.matches, false_limit, ransac);
        const double mean_hand_matches = streaming_.observe_hand_count(motion.partition.hand.size());
        motion.matching_ms = matching_ms;
        motion.motion_ms = ms_since(start);
        item.times.matching = motion.matching_ms;
        item.times.motion = motion.motion_ms;
        item.analysis = analyze_frame(item.frame, std::move(motion), mean_hand_matches, config_.detector);
      }
      prev_features_ = std::move(feats);
    }
    if (item.analysis) {
      item.times.segmentation = item.analysis->segmentation_ms;
      item.times.seeding = item.analysis->seeding_ms;
    }
    item.times.wall += ms_since(wall);
    ++cursor_;
    return item;
  }

 private:
  Frame load(std::int64_t t) {
    Frame frame = read_frame(files_[static_cast<std::size_t>(t)], t);
    if (t == 0 && width_ == 0) {
      width_ = frame.width;
      height_ = frame.height;
    } else if (frame.width != width_ || frame.height != height_) {
      throw InputError("frame size mismatch in " + files_[static_cast<std::size_t>(t)].string() + ": " +
                       std::to_string(frame.width) + "x" + std::to_string(frame.height) + " vs " +
                       std::to_string(width_) + "x" + std::to_string(height_));
    }
    return frame;
  }

  void first_pass() {
    std::vector<FeatureSet> features;
    std::vector<MatchResult> matches;
    for (std::size_t t = 0; t < files_.size(); ++t) {
      const auto wall = Clock::now();
      auto start = Clock::now();
      const Frame frame = load(static_cast<std::int64_t>(t));
      decode_ms_.push_back(ms_since(start));
      start = Clock::now();
      FeatureSet feats = extract_features(frame, config_.detector.max_features);
      features_ms_.push_back(ms_since(start));
      if (t > 0) {
        start = Clock::now();
        matches.push_back(match_features(features.back(), feats, config_.detector.max_features));
        matching_ms_.push_back(ms_since(start));
        features.back() = {};
      }
      features.push_back(std::move(feats));
      pass1_wall_ms_.push_back(ms_since(wall));
    }
    std::vector<std::vector<Correspondence>> per_pair;
    per_pair.reserve(matches.size());
    for (const auto& m : matches) per_pair.push_back(m.matches);
    stats_.displacement_median = median_displacement(per_pair);
    stats_.false_limit = kFalseLimitPerMedian * stats_.displacement_median;
    const double false_limit = effective_false_limit(stats_);
    std::vector<std::size_t> counts;
    for (std::size_t k = 0; k < matches.size(); ++k) {
      const auto wall = Clock::now();
      RansacOptions ransac = config_.detector.ransac;
      ransac.seed = pair_seed(config_.seed, static_cast<std::int64_t>(k + 1));
      MotionAnalysis motion;
      motion.matching_ms = matching_ms_[k];
      motion.partition = partition_motion(std::move(per_pair[k]), false_limit, ransac);
      motion.matches = std::move(matches[k]);
      motion.motion_ms = ms_since(wall);
      counts.push_back(motion.partition.hand.size());
      pass1_wall_ms_[k + 1] += motion.motion_ms;
      motion_.push_back(std::move(motion));
    }
    stats_.mean_hand_matches = mean_hand_count(counts);
  }

  const PipelineConfig& config_;
  std::vector<std::filesystem::path> files_;
  std::size_t cursor_ = 0;
  int width_ = 0;
  int height_ = 0;

  VideoStatistics stats_;
  std::vector<MotionAnalysis> motion_;
  std::vector<double> decode_ms_, features_ms_, matching_ms_, pass1_wall_ms_;

  StreamingStatistics streaming_;
  FeatureSet prev_features_;
};

Frame overlay_frame(const Frame& frame, const BinaryMask& mask) {
  Frame out = frame;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (!mask(y, x)) continue;
      auto px = out.at(x, y);
      px(0) = static_cast<std::uint8_t>((px(0) + 255) / 2);
      px(1) = static_cast<std::uint8_t>((px(1) + 40) / 2);
      px(2) = static_cast<std::uint8_t>((px(2) + 40) / 2);
    }
  }
  return out;
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory " + dir.string() + ": " + ec.message());
}

nlohmann::json debug_record(const FrameAnalysis& a, const DetectionOutput& out, const VideoStatistics& stats,
                            const TrackerState& state) {
  const auto& p = a.motion.partition;
  nlohmann::json j;
  j["index"] = a.index;
  j["statistics"] = {{"displacement_median", stats.displacement_median},
                     {"false_limit", stats.false_limit},
                     {"mean_hand_matches", stats.mean_hand_matches}};
  j["matches"] = a.motion.matches.matches.size();
  j["low_texture"] = a.motion.matches.low_texture;
  j["false"] = p.false_set.size();
  j["candidates"] = p.candidates.size();
  j["camera"] = p.camera.size();
  j["hand"] = p.hand.size();
  j["camera_model"] = p.camera_model;
  std::vector<double> h(9);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) h[static_cast<std::size_t>(r * 3 + c)] = p.homography(r, c);
  }
  j["homography"] = h;
  j["superpixels"] = a.map.count();
  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t i = 0; i < a.seeds.ids.size(); ++i) {
    const int id = a.seeds.ids[i];
    seeds.push_back({{"id", id}, {"hand_matches", a.map.records[static_cast<std::size_t>(id)].hand_matches}});
  }
  j["seeds"] = seeds;
  nlohmann::json log = nlohmann::json::array();
  for (const auto& s : out.growth.log) log.push_back({s.id, s.score, s.reference});
  j["seed_peak"] = out.growth.seed_peak;
  j["acceptance"] = log;
  j["contrast_evaluations"] = out.contrast_evaluations;
  j["full_evaluations"] = out.full_evaluations;
  j["rejected"] = out.rejected;
  j["pool"] = nlohmann::json::parse(pool_to_json(state.pool));
  return j;
}

std::string norm_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

}  // namespace

void DetectorOptions::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(beta >= 0.0)) throw ConfigError("beta must be non-negative");
  if (superpixels < 16) throw ConfigError("superpixels must be at least 16");
  if (!(compactness > 0.0)) throw ConfigError("compactness must be positive");
  if (max_features < 50) throw ConfigError("max_features must be at least 50");
  if (!(ransac.inlier_tol > 0.0)) throw ConfigError("ransac_tolerance must be positive");
  if (ransac.iterations < 1) throw ConfigError("ransac_iterations must be positive");
}

void PipelineConfig::validate() const {
  detector.validate();
  if (streaming_warmup < 1) throw ConfigError("streaming_warmup must be positive");
}

MotionAnalysis analyze_motion(const FeatureSet& prev, const FeatureSet& cur, double false_limit,
                              const DetectorOptions& options, std::uint64_t ransac_seed) {
  MotionAnalysis m;
  auto start = Clock::now();
  m.matches = match_features(prev, cur, options.max_features);
  m.matching_ms = ms_since(start);
  start = Clock::now();
  RansacOptions ransac = options.ransac;
  ransac.seed = ransac_seed;
  m.partition = partition_motion(m.matches.matches, false_limit, ransac);
  m.motion_ms = ms_since(start);
  return m;
}

FrameAnalysis analyze_frame(const Frame& cur, MotionAnalysis motion, double mean_hand_matches,
                            const DetectorOptions& options) {
  FrameAnalysis a;
  a.index = cur.index;
  auto start = Clock::now();
  a.map = slic_segment(cur, scaled_superpixel_count(options.superpixels, cur.width, cur.height), options.compactness);
  a.graph = build_adjacency(a.map);
  a.segmentation_ms = ms_since(start);
  start = Clock::now();
  a.motion = std::move(motion);
  count_hand_matches(hand_endpoints(a.motion.partition), a.map);
  a.seeds = detect_seeds(a.map, a.graph, mean_hand_matches);
  a.seeding_ms = ms_since(start);
  return a;
}

DetectionOutput detect_from_analysis(const FrameAnalysis& analysis, const TrackerState& state,
                                     const DetectorOptions& options) {
  DetectionOutput out;
  out.result.frame_index = analysis.index;
  if (analysis.seeds.empty()) return out;
  const auto start = Clock::now();
  const ScoringContext ctx = make_scoring_context(analysis.map, analysis.seeds, state.prev_centers(),
                                                  state.pool.histograms(), state.prev_frame_no_hand,
                                                  options.early_rejection);
  SuperpixelScorer scorer(analysis.map, ctx);
  out.growth = grow(analysis.seeds.ids, analysis.graph, options.alpha, scorer);
  out.result = refine_components(out.growth.accepted, analysis.graph, analysis.map,
                                 scaled_beta(options.beta, analysis.map.width, analysis.map.height), analysis.index);
  out.contrast_evaluations = scorer.contrast_evaluations();
  out.full_evaluations = scorer.full_evaluations();
  out.rejected = scorer.rejected();
  out.growing_ms = ms_since(start);
  return out;
}

DetectionOutput detect_frame(const Frame& prev, const Frame& cur, const TrackerState& state,
                             const VideoStatistics& stats, const DetectorOptions& options) {
  if (prev.width != cur.width || prev.height != cur.height) throw InputError("frame size mismatch");
  const FeatureSet a = extract_features(prev, options.max_features);
  const FeatureSet b = extract_features(cur, options.max_features);
  MotionAnalysis motion = analyze_motion(a, b, effective_false_limit(stats), options, options.ransac.seed);
  const FrameAnalysis analysis = analyze_frame(cur, std::move(motion), stats.mean_hand_matches, options);
  return detect_from_analysis(analysis, state, options);
}

BinaryMask hand_mask(const DetectionOutput& output, const FrameAnalysis& analysis) {
  return render_mask(output.result, analysis.map);
}

PipelineConfig pipeline_config_from(const KeyValueConfig& values) {
  PipelineConfig cfg;
  auto number = [](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(d)) throw ConfigError("");
      return d;
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    }
  };
  auto integer = [&](const std::string& key, const std::string& v) {
    const double d = number(key, v);
    if (d != std::floor(d)) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
    return static_cast<long long>(d);
  };
  auto boolean = [](const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
  };
  for (const auto& [raw, v] : values.values()) {
    const std::string key = norm_key(raw);
    if (key == "input") cfg.input = v;
    else if (key == "output") cfg.output = v;
    else if (key == "alpha") cfg.detector.alpha = number(key, v);
    else if (key == "beta") cfg.detector.beta = number(key, v);
    else if (key == "superpixels") cfg.detector.superpixels = static_cast<int>(integer(key, v));
    else if (key == "compactness") cfg.detector.compactness = number(key, v);
    else if (key == "max_features") cfg.detector.max_features = static_cast<int>(integer(key, v));
    else if (key == "ransac_tolerance") cfg.detector.ransac.inlier_tol = number(key, v);
    else if (key == "ransac_iterations") cfg.detector.ransac.iterations = static_cast<int>(integer(key, v));
    else if (key == "early_rejection") cfg.detector.early_rejection = boolean(key, v);
    else if (key == "statistics") {
      if (v == "two-pass" || v == "two_pass") cfg.statistics = StatisticsMode::TwoPass;
      else if (v == "streaming") cfg.statistics = StatisticsMode::Streaming;
      else throw ConfigError("'statistics' must be two-pass or streaming, got '" + v + "'");
    } else if (key == "streaming_warmup") cfg.streaming_warmup = static_cast<int>(integer(key, v));
    else if (key == "seed") {
      const long long s = integer(key, v);
      if (s < 0) throw ConfigError("'seed' must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "overlay") cfg.overlay = boolean(key, v);
    else if (key == "debug_log") cfg.debug_log = boolean(key, v);
    else throw ConfigError("unknown configuration key '" + raw + "'");
  }
  cfg.detector.ransac.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

RunSummary run(const PipelineConfig& config) {
  config.validate();
  const auto run_start = Clock::now();
  FrameSource source(config);
  make_dir(config.output / "masks");
  if (config.overlay) make_dir(config.output / "overlay");
  std::ofstream records(config.output / "frames.jsonl");
  if (!records) throw InputError("cannot write " + (config.output / "frames.jsonl").string());
  std::ofstream debug;
  if (config.debug_log) {
    debug.open(config.output / "debug.jsonl");
    if (!debug) throw InputError("cannot write " + (config.output / "debug.jsonl").string());
  }

  RunSummary summary;
  TrackerState state;
  for (std::size_t t = 0; t < source.size(); ++t) {
    FrameSource::Item item = source.next();
    if (t == 0) state = make_tracker_state(source.width(), source.height());
    const auto post = Clock::now();
    FrameRecord rec;
    rec.index = static_cast<std::int64_t>(t);
    rec.name = source.files()[t].stem().string();

    DetectionOutput out;
    out.result.frame_index = rec.index;
    BinaryMask mask = empty_mask(item.frame.width, item.frame.height);
    if (item.analysis) {
      out = detect_from_analysis(*item.analysis, state, config.detector);
      item.times.growing = out.growing_ms;
      mask = hand_mask(out, *item.analysis);
      rec.seeds = item.analysis->seeds.size();
      rec.hand_correspondences = item.analysis->motion.partition.hand.size();
    }
    auto start = Clock::now();
    commit_frame(state, out.result);
    item.times.tracking = ms_since(start);
    rec.pattern = out.result.pattern;
    rec.components = out.result.components.size();

    start = Clock::now();
    write_mask_png(mask, config.output / "masks" / (rec.name + ".png"));
    if (config.overlay)
      write_frame_png(overlay_frame(item.frame, mask), config.output / "overlay" / (rec.name + ".png"));
    if (config.debug_log && item.analysis) {
      debug << debug_record(*item.analysis, out, source.statistics(), state).dump() << '\n';
    }
    item.times.output = ms_since(start);
    item.times.wall += ms_since(post);

    nlohmann::json j;
    j["index"] = rec.index;
    j["frame"] = rec.name;
    j["pattern"] = to_string(rec.pattern);
    j["components"] = rec.components;
    j["seeds"] = rec.seeds;
    j["hand_correspondences"] = rec.hand_correspondences;
    j["timing_ms"] = item.times.json();
    j["wall_ms"] = item.times.wall;
    records << j.dump() << '\n';
    summary.frames.push_back(std::move(rec));
  }
  summary.statistics = source.statistics();
  summary.seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  return summary;
}

SweepResult sweep(const PipelineConfig& config, const std::vector<double>& alphas, const std::vector<double>& betas,
                  const std::filesystem::path& truth) {
  if (alphas.empty() || betas.empty()) throw ConfigError("sweep needs at least one alpha and one beta");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("sweep alpha values must lie in (0, 1)");
  }
  for (double b : betas) {
    if (!(b >= 0.0)) throw ConfigError("sweep beta values must be non-negative");
  }
  config.validate();
  FrameSource source(config);

  std::map<std::string, std::filesystem::path> truth_files;
  if (!std::filesystem::is_directory(truth)) throw InputError("not a directory: " + truth.string());
  for (const auto& e : std::filesystem::directory_iterator(truth)) {
    if (e.is_regular_file()) truth_files.emplace(e.path().stem().string(), e.path());
  }

  struct Cell {
    DetectorOptions options;
    TrackerState state;
    std::vector<FrameMetrics> metrics;
  };
  std::vector<Cell> cells;
  for (double a : alphas) {
    for (double b : betas) {
      Cell c;
      c.options = config.detector;
      c.options.alpha = a;
      c.options.beta = b;
      cells.push_back(std::move(c));
    }
  }

  for (std::size_t t = 0; t < source.size(); ++t) {
    FrameSource::Item item = source.next();
    const std::string name = source.files()[t].stem().string();
    const auto it = truth_files.find(name);
    if (it == truth_files.end())
      throw InputError("missing ground-truth mask for " + source.files()[t].filename().string());
    const BinaryMask gt = read_mask(it->second);
    for (auto& c : cells) {
      if (t == 0) c.state = make_tracker_state(source.width(), source.height());
      DetectionOutput out;
      out.result.frame_index = static_cast<std::int64_t>(t);
      BinaryMask mask = empty_mask(item.frame.width, item.frame.height);
      if (item.analysis) {
        out = detect_from_analysis(*item.analysis, c.state, c.options);
        mask = hand_mask(out, *item.analysis);
      }
      commit_frame(c.state, out.result);
      c.metrics.push_back({name, f_score(mask, gt), iou(mask, gt)});
    }
  }

  SweepResult result;
  result.alphas = alphas;
  result.betas = betas;
  std::size_t k = 0;
  for (double a : alphas) {
    for (double b : betas) {
      const SequenceMetrics m = summarize(std::move(cells[k++].metrics));
      result.cells.push_back({a, b, m.mean_f, m.mean_iou});
    }
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "alpha";
  for (double b : result.betas) out << ",f_" << b << ",iou_" << b;
  out << '\n';
  char buf[32];
  for (std::size_t a = 0; a < result.alphas.size(); ++a) {
    out << result.alphas[a];
    for (std::size_t b = 0; b < result.betas.size(); ++b) {
      const auto& c = result.at(a, b);
      std::snprintf(buf, sizeof(buf), ",%.4f,%.4f", c.mean_f, c.mean_iou);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<CategoryMetrics> evaluate_dataset(const std::filesystem::path& root, const PipelineConfig& config) {
  if (!std::filesystem::is_directory(root)) throw InputError("dataset root is not a directory: " + root.string());
  std::vector<std::filesystem::path> categories;
  for (const auto& e : std::filesystem::directory_iterator(root)) {
    if (e.is_directory() && std::filesystem::is_directory(e.path() / "frames") &&
        std::filesystem::is_directory(e.path() / "masks")) {
      categories.push_back(e.path());
    }
  }
  if (categories.empty()) throw InputError("no category directories with frames/ and masks/ under " + root.string());
  std::sort(categories.begin(), categories.end());
  std::vector<CategoryMetrics> out;
  for (const auto& dir : categories) {
    PipelineConfig cfg = config;
    cfg.input = dir / "frames";
    cfg.output = config.output / dir.filename();
    run(cfg);
    out.push_back({dir.filename().string(), evaluate_sequence(cfg.output / "masks", dir / "masks")});
  }
  return out;
}

}  // namespace egohand
