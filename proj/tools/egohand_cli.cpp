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

// egohand command-line front end: detect, sweep, synth, eval.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "egohand/config.hpp"
#include "egohand/errors.hpp"
#include "egohand/eval.hpp"
#include "egohand/pipeline.hpp"
#include "egohand/synth.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

// Flags shared by detect, sweep and dataset evaluation. Unset flags leave the config file alone.
struct DetectorFlags {
  std::optional<std::string> config;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<int> superpixels;
  std::optional<double> compactness;
  std::optional<int> max_features;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> statistics;
  bool overlay = false;
  bool debug_log = false;
  bool no_early_rejection = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key=value configuration file");
    app->add_option("--alpha", alpha, "growing termination ratio in (0, 1)");
    app->add_option("--beta", beta, "minimum component size in pixels at 640x360");
    app->add_option("--superpixels", superpixels, "superpixel count at 640x360");
    app->add_option("--compactness", compactness, "superpixel compactness");
    app->add_option("--max-features", max_features, "ORB keypoint budget");
    app->add_option("--seed", seed, "sampling seed");
    app->add_option("--statistics", statistics, "two-pass or streaming");
    app->add_flag("--overlay", overlay, "write tinted overlay frames");
    app->add_flag("--debug-log", debug_log, "write debug.jsonl");
    app->add_flag("--no-early-rejection", no_early_rejection, "score every superpixel fully");
  }

  egohand::PipelineConfig build(const std::string& input, const std::string& output) const {
    egohand::KeyValueConfig kv;
    if (config) kv = egohand::KeyValueConfig::load(*config);
    auto set = [&](const std::string& key, const std::string& value) { kv.set(key, value); };
    auto num = [](double v) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    if (!input.empty()) set("input", input);
    if (!output.empty()) set("output", output);
    if (alpha) set("alpha", num(*alpha));
    if (beta) set("beta", num(*beta));
    if (superpixels) set("superpixels", std::to_string(*superpixels));
    if (compactness) set("compactness", num(*compactness));
    if (max_features) set("max_features", std::to_string(*max_features));
    if (seed) set("seed", std::to_string(*seed));
    if (statistics) set("statistics", *statistics);
    if (overlay) set("overlay", "true");
    if (debug_log) set("debug_log", "true");
    if (no_early_rejection) set("early_rejection", "false");
    return egohand::pipeline_config_from(kv);
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw egohand::InputError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hand detection in egocentric video by dynamic region growing"};
  app.require_subcommand(1);

  DetectorFlags detect_flags;
  std::string detect_input, detect_output;
  auto* detect = app.add_subcommand("detect", "detect hands in a frame sequence");
  detect->add_option("--input", detect_input, "frame directory or printf pattern")->required();
  detect->add_option("--output", detect_output, "output directory")->required();
  detect_flags.attach(detect);

  DetectorFlags sweep_flags;
  std::string sweep_input, sweep_truth, sweep_out, alphas = "0.5,0.55,0.6,0.65,0.7", betas = "300,350,400,450,500";
  auto* sweep = app.add_subcommand("sweep", "alpha x beta grid of mean F and IoU");
  sweep->add_option("--input", sweep_input, "frame directory")->required();
  sweep->add_option("--truth", sweep_truth, "ground-truth mask directory")->required();
  sweep->add_option("--out", sweep_out, "CSV output path")->required();
  sweep->add_option("--alphas", alphas, "comma-separated alpha values");
  sweep->add_option("--betas", betas, "comma-separated beta values");
  sweep_flags.attach(sweep);

  std::string synth_config, synth_output;
  bool synth_reference = false;
  std::uint64_t synth_seed = 7;
  auto* synth = app.add_subcommand("synth", "render a synthetic scene with ground-truth masks");
  synth->add_option("--config", synth_config, "scene key=value file");
  synth->add_flag("--reference", synth_reference, "render the built-in reference scene");
  synth->add_option("--seed", synth_seed, "texture and noise seed for --reference");
  synth->add_option("--output", synth_output, "output directory")->required();

  DetectorFlags eval_flags;
  std::string eval_pred, eval_truth, eval_out, eval_dataset, eval_work = "egohand_dataset_out";
  auto* eval = app.add_subcommand("eval", "score predicted masks against ground truth");
  eval->add_option("--pred", eval_pred, "predicted mask directory");
  eval->add_option("--truth", eval_truth, "ground-truth mask directory");
  eval->add_option("--dataset", eval_dataset, "root holding <category>/frames and <category>/masks");
  eval->add_option("--work", eval_work, "detection output root for --dataset");
  eval->add_option("--out", eval_out, "CSV output path")->required();
  eval_flags.attach(eval);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*detect) {
      const auto cfg = detect_flags.build(detect_input, detect_output);
      if (!std::filesystem::exists(cfg.input)) throw egohand::InputError("input not found: " + cfg.input.string());
      const auto summary = egohand::run(cfg);
      std::size_t hands = 0;
      for (const auto& f : summary.frames) hands += f.components > 0;
      std::printf("%zu frames, %zu with hands, %.2f s (%.1f fps)\n", summary.frames.size(), hands, summary.seconds,
                  summary.frames.size() / summary.seconds);
    } else if (*sweep) {
      const auto cfg = sweep_flags.build(sweep_input, "");
      const auto result = egohand::sweep(cfg, egohand::parse_double_list(alphas), egohand::parse_double_list(betas),
                                         sweep_truth);
      const std::string csv = egohand::sweep_csv(result);
      write_text(sweep_out, csv);
      std::cout << csv;
    } else if (*synth) {
      if (synth_config.empty() == !synth_reference) {
        throw egohand::ConfigError("synth needs exactly one of --config or --reference");
      }
      const auto scene_cfg = synth_reference ? egohand::reference_scene(synth_seed)
                                             : egohand::scene_from_config(egohand::KeyValueConfig::load(synth_config));
      egohand::write_scene(egohand::generate(scene_cfg), synth_output);
      std::printf("%d frames written to %s\n", scene_cfg.frames, synth_output.c_str());
    } else if (*eval) {
      if (!eval_dataset.empty()) {
        const auto cfg = eval_flags.build("", eval_work);
        const auto categories = egohand::evaluate_dataset(eval_dataset, cfg);
        const std::string csv = egohand::category_csv(categories);
        write_text(eval_out, csv);
        std::cout << csv;
      } else {
        if (eval_pred.empty() || eval_truth.empty()) {
          throw egohand::ConfigError("eval needs --pred and --truth, or --dataset");
        }
        const auto metrics = egohand::evaluate_sequence(eval_pred, eval_truth);
        egohand::write_metrics_csv(metrics, eval_out);
        std::printf("frames %zu  mean F %.4f  mean IoU %.4f\n", metrics.frames.size(), metrics.mean_f,
                    metrics.mean_iou);
      }
    }
  } catch (const egohand::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const egohand::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const egohand::ParameterError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
