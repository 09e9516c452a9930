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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: egohand_acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <string>
#include <vector>

#include "egohand/eval.hpp"
#include "egohand/growing.hpp"
#include "egohand/motion.hpp"
#include "egohand/pipeline.hpp"
#include "egohand/scoring.hpp"
#include "egohand/synth.hpp"
#include "egohand/tracker.hpp"
#include "growth_oracle.hpp"

namespace fs = std::filesystem;
using namespace egohand;

namespace {

// Tolerances.
constexpr double kMinIou = 0.80;
constexpr double kMinF = 0.85;
constexpr double kMaxRunSeconds = 60.0;
constexpr double kMaxReprojectionPx = 1.0;
constexpr double kMinGoodPairFraction = 0.95;
constexpr double kMinHandEndpointsInBlob = 0.80;
constexpr double kCueRelativeTolerance = 1e-12;
constexpr double kTrackerTolerance = 1e-12;
constexpr double kMinFps = 10.0;
constexpr double kMaxMaskChange = 0.02;
constexpr std::uint64_t kReferenceSeed = 7;

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::vector<nlohmann::json> read_records(const fs::path& path) {
  std::ifstream in(path);
  std::vector<nlohmann::json> out;
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

double mean_wall_ms(const std::vector<nlohmann::json>& records) {
  double sum = 0.0;
  for (const auto& r : records) sum += r.at("wall_ms").get<double>();
  return sum / static_cast<double>(records.size());
}

double mean_stage_ms(const std::vector<nlohmann::json>& records, const char* stage) {
  double sum = 0.0;
  for (const auto& r : records) sum += r.at("timing_ms").at(stage).get<double>();
  return sum / static_cast<double>(records.size());
}

PipelineConfig defaults(const fs::path& input, const fs::path& output) {
  PipelineConfig cfg;
  cfg.input = input;
  cfg.output = output;
  return cfg;
}

// --- reference scene -------------------------------------------------------------

struct Reference {
  SceneConfig config;
  SceneSequence scene;
  fs::path dir;
};

void accuracy_and_throughput(const Reference& ref, const fs::path& work) {
  const auto on = defaults(ref.dir / "frames", work / "detect_on");
  const RunSummary summary = run(on);
  const auto metrics = evaluate_sequence(on.output / "masks", ref.dir / "masks");
  report("synthetic accuracy",
         metrics.mean_iou >= kMinIou && metrics.mean_f >= kMinF && summary.seconds <= kMaxRunSeconds,
         format("mean IoU %.4f (>= %.2f), mean F %.4f (>= %.2f), run %.1f s (<= %.0f s)", metrics.mean_iou, kMinIou,
                metrics.mean_f, kMinF, summary.seconds, kMaxRunSeconds));

  const double fps = static_cast<double>(summary.frames.size()) / summary.seconds;

  auto off = defaults(ref.dir / "frames", work / "detect_off");
  off.detector.early_rejection = false;
  run(off);
  double worst = 0.0;
  int changed = 0;
  for (std::size_t t = 0; t < ref.scene.masks.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06zu.png", t);
    const BinaryMask a = read_mask(on.output / "masks" / name);
    const BinaryMask b = read_mask(off.output / "masks" / name);
    const double hand = static_cast<double>(ref.scene.masks[t].cast<int>().sum());
    const double diff = static_cast<double>((a != b).count());
    if (diff > 0) ++changed;
    if (hand > 0) worst = std::max(worst, diff / hand);
    else if (diff > 0) worst = std::max(worst, 1.0);
  }
  const auto rec_on = read_records(on.output / "frames.jsonl");
  const auto rec_off = read_records(off.output / "frames.jsonl");
  const double wall_on = mean_wall_ms(rec_on), wall_off = mean_wall_ms(rec_off);
  const double grow_on = mean_stage_ms(rec_on, "growing"), grow_off = mean_stage_ms(rec_off, "growing");
  // Rejection only touches scoring and growing. Whole-frame wall time varies by several ms
  // between runs, so the cost comparison uses the growing stage and wall time is informational.
  report("throughput / early rejection", fps >= kMinFps && worst <= kMaxMaskChange && grow_off > grow_on,
         format("%.1f fps (>= %.0f); without rejection: worst mask change %.1f%% of hand pixels (<= %.0f%%), "
                "%d frames changed, scoring+growing %.2f -> %.2f ms per frame (wall %.1f -> %.1f ms)",
                fps, kMinFps, 100.0 * worst, 100.0 * kMaxMaskChange, changed, grow_on, grow_off, wall_on, wall_off));
}

void motion_separation(const Reference& ref) {
  const SceneTruth truth = planted_truth(ref.config);
  std::vector<FeatureSet> features;
  for (const auto& f : ref.scene.frames) features.push_back(extract_features(f, 1000));
  std::vector<std::vector<Correspondence>> pairs;
  for (std::size_t t = 0; t + 1 < features.size(); ++t) {
    pairs.push_back(match_features(features[t], features[t + 1], 1000).matches);
  }
  const VideoStatistics stats = compute_video_statistics(pairs);

  int good = 0;
  double inside_sum = 0.0;
  int inside_frames = 0;
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    RansacOptions opt;
    opt.seed = t + 1;
    const MotionPartition part = partition_motion(pairs[t], effective_false_limit(stats), opt);
    double err = 0.0;
    for (const auto& m : part.all) {
      err += (apply_homography(part.homography, m.p) - apply_homography(truth.homographies[t], m.p)).norm();
    }
    err /= std::max<std::size_t>(1, part.all.size());
    good += part.camera_model && err < kMaxReprojectionPx;

    const BinaryMask& blob = truth.masks[t + 1];
    if (truth.visible_blobs[t + 1] == 0 || part.hand.empty()) continue;
    int inside = 0;
    for (const auto& q : hand_endpoints(part)) {
      const int x = static_cast<int>(std::lround(q.x())), y = static_cast<int>(std::lround(q.y()));
      inside += blob(y, x) != 0;
    }
    inside_sum += static_cast<double>(inside) / static_cast<double>(part.hand.size());
    ++inside_frames;
  }
  const double good_fraction = static_cast<double>(good) / static_cast<double>(pairs.size());
  const double inside_mean = inside_frames ? inside_sum / inside_frames : 0.0;
  report("motion separation", good_fraction >= kMinGoodPairFraction && inside_mean >= kMinHandEndpointsInBlob,
         format("%.1f%% of pairs with mean reprojection error < %.0f px (>= %.0f%%); %.1f%% of hand endpoints in "
                "the blob over %d frames (>= %.0f%%)",
                100.0 * good_fraction, kMaxReprojectionPx, 100.0 * kMinGoodPairFraction, 100.0 * inside_mean,
                inside_frames, 100.0 * kMinHandEndpointsInBlob));
}

void parameter_grid(const Reference& ref, const fs::path& work) {
  const std::vector<double> alphas{0.5, 0.55, 0.6, 0.65, 0.7};
  const std::vector<double> betas{300, 350, 400, 450, 500};
  const auto grid = sweep(defaults(ref.dir / "frames", work / "sweep"), alphas, betas, ref.dir / "masks");
  std::ofstream(work / "sweep.csv") << sweep_csv(grid);
  int strict = 0, weak = 0;
  double lo = 1.0, hi = 0.0;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    const double first = grid.at(0, b).mean_f, last = grid.at(alphas.size() - 1, b).mean_f;
    double interior = 0.0;
    for (std::size_t a = 1; a + 1 < alphas.size(); ++a) interior = std::max(interior, grid.at(a, b).mean_f);
    strict += interior > first && interior > last;
    weak += interior >= first && interior >= last;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      lo = std::min(lo, grid.at(a, b).mean_f);
      hi = std::max(hi, grid.at(a, b).mean_f);
    }
  }
  report("parameter grid shape", strict == static_cast<int>(betas.size()),
         format("%d/%zu columns with a strict interior maximum in alpha (%d with interior >= both ends); "
                "F spans %.4f..%.4f over the grid",
                strict, betas.size(), weak, lo, hi));
}

// --- oracles ---------------------------------------------------------------------

void growth_oracle() {
  std::mt19937_64 rng(2024);
  int agree = 0, total = 0;
  for (int g = 0; g < 100; ++g) {
    const auto graph = fixtures::random_scored_graph(rng);
    for (double alpha : {0.5, 0.6, 0.7}) {
      auto got = grow(graph.seeds, graph.graph, alpha, [&](int id) {
                   return graph.score[static_cast<std::size_t>(id)];
                 }).accepted;
      auto want = fixtures::brute_force_growth(graph.seeds, graph.graph, alpha, graph.score);
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      agree += got == want;
      ++total;
    }
  }
  report("growth oracle", agree == total,
         format("%d/%d graph x alpha cases set-identical to the literal trace", agree, total));
}

double kl_direct(const Histogram& p, const Histogram& q) {
  double s = 0.0;
  for (int i = 0; i < kHistogramBins; ++i) s += p[i] * std::log(p[i] / q[i]) + q[i] * std::log(q[i] / p[i]);
  return s;
}

Histogram random_histogram(std::mt19937_64& rng) {
  std::gamma_distribution<double> g(0.7, 1.0);
  Histogram h;
  for (int i = 0; i < kHistogramBins; ++i) h[i] = g(rng) + 1e-6;
  return h / h.sum();
}

void cue_oracles() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> px(0.0, 640.0), py(0.0, 360.0);
  std::uniform_int_distribution<int> n(0, 3);
  const double l = std::hypot(640.0, 360.0);
  double worst = 0.0;
  bool in_range = true;
  auto rel = [&](double got, double want) {
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
    in_range = in_range && got > 0.0 && got <= 1.0;
  };
  for (int i = 0; i < 1000; ++i) {
    const Histogram hk = random_histogram(rng), hu = random_histogram(rng), model = random_histogram(rng);
    const Eigen::Vector2d ck(px(rng), py(rng)), cu(px(rng), py(rng)), prev(px(rng), py(rng));
    rel(contrast_score(hk, hu), std::exp(-kl_direct(hk, hu)));
    rel(location_score(ck, cu, l), std::exp(-std::hypot(ck.x() - cu.x(), ck.y() - cu.y()) / l));
    rel(position_consistency_score(ck, prev, l), std::exp(-std::hypot(ck.x() - prev.x(), ck.y() - prev.y()) / l));
    rel(appearance_continuity_score(hk, model), std::exp(-kl_direct(hk, model)));

    ScoringContext ctx;
    ctx.diagonal = l;
    const int seeds = 1 + n(rng), prevs = n(rng), models = n(rng);
    for (int u = 0; u < seeds; ++u) ctx.seeds.push_back({u, {px(rng), py(rng)}, random_histogram(rng)});
    for (int j = 0; j < prevs; ++j) ctx.prev_hand_centers.emplace_back(px(rng), py(rng));
    for (int j = 0; j < models; ++j) ctx.models.push_back(random_histogram(rng));
    ctx.prev_frame_no_hand = prevs == 0;
    double joint = 0.0, s3 = 0.0, s4 = 0.0;
    for (const auto& s : ctx.seeds) {
      joint = std::max(joint, 0.3 * std::exp(-kl_direct(hk, s.histogram)) +
                                  0.2 * std::exp(-std::hypot(ck.x() - s.centroid.x(), ck.y() - s.centroid.y()) / l));
    }
    for (const auto& c : ctx.prev_hand_centers)
      s3 = std::max(s3, std::exp(-std::hypot(ck.x() - c.x(), ck.y() - c.y()) / l));
    for (const auto& m : ctx.models) s4 = std::max(s4, std::exp(-kl_direct(hk, m)));
    rel(fused_score(hk, ck, ctx).value, joint + 0.2 * s3 + 0.3 * s4);
  }
  report("cue formula oracles", worst <= kCueRelativeTolerance && in_range,
         format("worst relative error %.2e over 5000 cue and fusion values (<= %.0e), all in (0,1]: %s", worst,
                kCueRelativeTolerance, in_range ? "yes" : "no"));
}

HandDetectionResult observed(std::int64_t t, const std::vector<std::pair<Histogram, Eigen::Vector2d>>& comps) {
  HandDetectionResult r;
  r.frame_index = t;
  for (const auto& [h, c] : comps) {
    HandComponent comp;
    comp.histogram = h;
    comp.centroid = c;
    comp.pixel_count = 2000;
    r.components.push_back(comp);
  }
  r.pattern = pattern_for_component_count(r.components.size());
  return r;
}

void tracker_lifecycle() {
  std::mt19937_64 rng(5);
  const Histogram skin = random_histogram(rng);
  const Eigen::Vector2d c(320, 180);
  std::vector<std::string> problems;

  TrackerState s = make_tracker_state(640, 360);
  for (std::int64_t t = 1; t <= 10; ++t) commit_frame(s, observed(t, {{skin, c}}));
  if (!s.pool.models.empty()) problems.push_back("model before 10 consistent frames");
  commit_frame(s, observed(11, {{skin, c}}));
  if (s.pool.models.size() != 1 || s.pool.models[0].created != 11) problems.push_back("no spawn at frame 11");

  Histogram obs = skin;
  obs.head<4>() *= 1.3;
  obs /= obs.sum();
  commit_frame(s, observed(12, {{obs, c}}));
  double worst = 0.0;
  if (!s.pool.models.empty()) {
    const Histogram mix = 0.4 * obs + 0.6 * skin;
    for (int k = 0; k < kHistogramBins; ++k) {
      const double want = mix[k] / mix.sum();
      worst = std::max(worst, std::abs(s.pool.models[0].histogram[k] - want) / want);
    }
  }
  if (worst > kTrackerTolerance) problems.push_back("update arithmetic");

  const std::string before = pool_to_json(s.pool);
  for (std::int64_t t = 13; t <= 20; ++t) commit_frame(s, observed(t, {}));
  if (pool_to_json(s.pool) != before) problems.push_back("no-hand frames changed the pool");
  commit_frame(s, observed(512, {}));
  const bool kept_at_500 = s.pool.models.size() == 1;
  commit_frame(s, observed(513, {}));
  const bool gone_at_501 = s.pool.models.empty();
  if (!kept_at_500 || !gone_at_501) problems.push_back("expiry boundary");

  auto stream = [&](bool inject) {
    std::mt19937_64 r(8);
    std::uniform_real_distribution<double> wiggle(0.98, 1.02);
    const Histogram odd = random_histogram(r);
    TrackerState st = make_tracker_state(640, 360);
    for (std::int64_t t = 1; t <= 45; ++t) {
      Histogram h = skin;
      for (int k = 0; k < kHistogramBins; ++k) h[k] *= wiggle(r);
      h /= h.sum();
      if (inject && t == 30) commit_frame(st, observed(t, {{h, c}, {odd, {60, 60}}}));
      else commit_frame(st, observed(t, {{h, c}}));
    }
    return pool_to_json(st.pool);
  };
  if (stream(true) != stream(false)) problems.push_back("single-frame noise reached the pool");

  std::string detail = format("spawn at t+10, update error %.1e (<= %.0e), expiry 500 kept / 501 removed, "
                              "no-hand frames inert, noise immune",
                              worst, kTrackerTolerance);
  for (const auto& p : problems) detail += "; " + p;
  report("tracker lifecycle", problems.empty(), detail);
}

// --- scripted scenes ---------------------------------------------------------------

BlobSpec pattern_blob(int i) {
  const double cx[] = {170.0, 470.0, 320.0};
  const double cy[] = {110.0, 110.0, 262.0};
  BlobSpec b;
  b.cx = cx[i];
  b.cy = cy[i];
  b.ax = 30.0;
  b.ay = 15.0;
  b.fx = 1.0 / (20.0 + 3.0 * i);
  b.fy = 1.0 / (16.0 + 3.0 * i);
  b.phase_x = 2.5 + 1.3 * i;
  b.phase_y = 2.7 + 0.9 * i;
  b.radius = 42.0;
  b.aspect = 1.2;
  b.hue = 18.0 + 3.0 * i;
  return b;
}

SceneConfig pattern_scene(int blobs) {
  SceneConfig cfg;
  cfg.frames = 30;
  cfg.seed = 31 + static_cast<std::uint64_t>(blobs);
  cfg.motion.tx = 1.6;
  cfg.motion.ty = 0.8;
  cfg.motion.shake_x = 0.5;
  cfg.motion.shake_y = 0.3;
  for (int i = 0; i < blobs; ++i) cfg.blobs.push_back(pattern_blob(i));
  return cfg;
}

// One video in four segments holding 1, 2, 3 and then 0 visible blobs. Blob i enters at
// the start of segment i and all leave together, so the hand-free stretch sits in a video
// that has hands elsewhere.
constexpr int kSegment = 30;
constexpr int kSettle = 2;  // frames after each change that straddle it

SceneConfig scripted_pattern_video() {
  SceneConfig cfg = pattern_scene(3);
  cfg.frames = 4 * kSegment;
  cfg.seed = 31;
  for (int i = 0; i < 3; ++i) {
    cfg.blobs[static_cast<std::size_t>(i)].appear = i * kSegment;
    cfg.blobs[static_cast<std::size_t>(i)].disappear = 3 * kSegment;
  }
  return cfg;
}

void pattern_classification(const fs::path& work) {
  const int planted[] = {1, 2, 3, 0};
  const fs::path dir = work / "patterns";
  write_scene(generate(scripted_pattern_video()), dir);
  const RunSummary s = run(defaults(dir / "frames", dir / "out"));
  bool pass = true;
  std::string detail;
  for (int seg = 0; seg < 4; ++seg) {
    const HandPattern expected = pattern_for_component_count(static_cast<std::size_t>(planted[seg]));
    std::map<HandPattern, int> votes;
    int frames = 0;
    for (int t = seg * kSegment + kSettle; t < (seg + 1) * kSegment; ++t, ++frames)
      ++votes[s.frames[static_cast<std::size_t>(t)].pattern];
    HandPattern mode = HandPattern::NoHand;
    int best = -1;
    for (const auto& [p, v] : votes) {
      if (v > best) {
        best = v;
        mode = p;
      }
    }
    pass = pass && mode == expected;
    detail += format("%s%d blobs -> %s (%d/%d frames as planted)", seg ? ", " : "", planted[seg],
                     to_string(mode).c_str(), votes[expected], frames);
  }
  report("pattern classification", pass, detail);
}

void dataset_hook(const fs::path& work) {
  const fs::path root = work / "gtea_layout";
  const char* names[] = {"coffee", "peanut", "tea"};
  for (int i = 0; i < 3; ++i) {
    SceneConfig cfg = pattern_scene(1);
    cfg.frames = 12;
    cfg.seed = 100 + static_cast<std::uint64_t>(i);
    write_scene(generate(cfg), root / names[i]);
  }
  const auto categories = evaluate_dataset(root, defaults("", work / "gtea_out"));
  bool pass = categories.size() == 3;
  std::string detail = "per-category F:";
  for (const auto& c : categories) {
    pass = pass && std::isfinite(c.metrics.mean_f) && c.metrics.frames.size() == 12;
    detail += format(" %s %.3f", c.category.c_str(), c.metrics.mean_f);
  }
  std::ofstream(work / "categories.csv") << category_csv(categories);
  report("dataset hook", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "egohand_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  try {
    growth_oracle();
    cue_oracles();
    tracker_lifecycle();

    Reference ref;
    ref.config = reference_scene(kReferenceSeed);
    ref.scene = generate(ref.config);
    ref.dir = work / "reference";
    write_scene(ref.scene, ref.dir);

    accuracy_and_throughput(ref, work);
    motion_separation(ref);
    parameter_grid(ref, work);
    pattern_classification(work);
    dataset_hook(work);
  } catch (const std::exception& e) {
    report("acceptance run", false, std::string("aborted: ") + e.what());
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
