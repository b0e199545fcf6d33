/* Copyright 2026 The imbalseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
// imbalseg: class-imbalance tooling for semantic segmentation.
//
//   imbalseg synth   --out DIR [--spec FILE] [--seed N]
//   imbalseg stats   --manifest FILE --out CSV [--recount]
//   imbalseg train   --config FILE [--rcs-temperature T] [--rcs-min-pixels N]
//                    [--rcs-include-background BOOL]
//   imbalseg predict --config FILE --checkpoint A.segw [--checkpoint B.segw ...]
//                    --manifest FILE --out DIR [--tta ...] [--post-multipliers ...]
//   imbalseg eval    --pred DIR --gt DIR [--report CSV]
//   imbalseg ablate  --config FILE
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "imbalseg/commands.hpp"
#include "imbalseg/config.hpp"
#include "imbalseg/error.hpp"

namespace {

using namespace imbalseg;
namespace fs = std::filesystem;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("IMBALSEG_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("IMBALSEG_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

struct RcsOverrides {
  std::optional<double> temperature;
  std::optional<std::uint64_t> min_pixels;
  std::optional<bool> include_background;
};

PipelineConfig config_from(const std::string& path, std::optional<std::uint64_t> seed,
                           const RcsOverrides& rcs = {}) {
  PipelineConfig cfg = path.empty() ? PipelineConfig::desk_defaults() : load_config(path);
  if (seed) {
    cfg.seed = *seed;
    cfg.train.seed = *seed;
  }
  if (rcs.temperature) cfg.rcs.temperature = *rcs.temperature;
  if (rcs.min_pixels) cfg.rcs.min_pixels = *rcs.min_pixels;
  if (rcs.include_background) cfg.rcs.include_background = *rcs.include_background;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imbalseg: rare-class sampling, adaptive class weighting, TTA, ensembling and post-processing for "
               "class-imbalanced semantic segmentation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads_flag = 0;
  app.add_option("--config", config_path, "Pipeline config file (section.key=value)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Root random seed (overrides the config)");
  app.add_option("--threads", threads_flag, "Worker threads (fallback: IMBALSEG_THREADS)")->check(CLI::PositiveNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic imbalanced dataset");
  std::string synth_out, synth_spec;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--spec", synth_spec, "Synthetic spec file (shares=..., image_size=..., ...)")
      ->check(CLI::ExistingFile);

  // stats
  auto* stats = app.add_subcommand("stats", "Per-class pixel statistics of a manifest");
  std::string stats_manifest, stats_out;
  bool recount = false;
  stats->add_option("--manifest", stats_manifest, "Manifest (JSON lines)")->required();
  stats->add_option("--out", stats_out, "Output CSV")->required();
  stats->add_flag("--recount", recount, "Re-decode label files instead of trusting cached counts");

  RcsOverrides rcs;
  auto add_rcs_flags = [&rcs](CLI::App* cmd) {
    cmd->add_option("--rcs-temperature", rcs.temperature, "Rare-class sampling temperature")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--rcs-min-pixels", rcs.min_pixels, "Pixels a sample needs to count as containing a class");
    cmd->add_option("--rcs-include-background", rcs.include_background, "Let the background class be drawn (true/false)");
  };

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the pixel classifier");
  train_cmd->add_option("--config", config_path, "Pipeline config file")->check(CLI::ExistingFile);
  add_rcs_flags(train_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "TTA + ensemble + post-process inference");
  std::vector<std::string> checkpoints;
  std::string predict_manifest, predict_out, tta_flag, post_flag;
  bool no_post = false;
  predict_cmd->add_option("--config", config_path, "Pipeline config file")->check(CLI::ExistingFile);
  predict_cmd->add_option("--checkpoint", checkpoints, "SEGW checkpoint(s); several form an ensemble")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--manifest", predict_manifest, "Images to segment (manifest)")->required();
  predict_cmd->add_option("--out", predict_out, "Output directory (default: predict.out_dir)");
  predict_cmd->add_option("--tta", tta_flag, "none | all | identity,hflip,vflip,hvflip");
  predict_cmd->add_option("--post-multipliers", post_flag, "bg=0.95,fg=2.0 or 0=0.95,1=2.0,...");
  predict_cmd->add_flag("--no-post", no_post, "Disable the probability post-process");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Confusion-matrix mIoU of predictions");
  std::string pred_dir, gt_dir, report;
  eval_cmd->add_option("--config", config_path, "Pipeline config file (class set)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--pred", pred_dir, "Directory of predicted label PNGs")->required();
  eval_cmd->add_option("--gt", gt_dir, "Directory of ground-truth label PNGs")->required();
  eval_cmd->add_option("--report", report, "Write the per-class report CSV here");

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "Four-row component ablation on synthetic data");
  ablate_cmd->add_option("--config", config_path, "Pipeline config file")->check(CLI::ExistingFile);
  add_rcs_flags(ablate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    const int threads = resolve_threads(threads_flag);
    if (*synth) {
      const PipelineConfig cfg = config_from(config_path, seed);
      SyntheticSpec spec = cfg.synth;
      if (!synth_spec.empty()) {
        std::ifstream in(synth_spec);
        std::stringstream ss;
        ss << in.rdbuf();
        spec = parse_synthetic_spec(ss.str(), cfg.class_set);
      }
      commands::cmd_synth(spec, synth_out, cfg.seed, std::cout);
    } else if (*stats) {
      const PipelineConfig cfg = config_from(config_path, seed);
      const ClassStats s = commands::cmd_stats(stats_manifest, cfg.class_set, stats_out, recount);
      std::cout << "wrote " << stats_out << " (" << s.total_valid_pixels << " valid pixels)\n";
    } else if (*train_cmd) {
      if (config_path.empty()) throw UsageError("train requires --config");
      const PipelineConfig cfg = config_from(config_path, seed, rcs);
      const TrainResult r = commands::cmd_train(cfg);
      std::cout << "trained " << r.log.rows.size() << " iterations; final loss " << r.log.rows.back().loss
                << "\ncheckpoint: " << cfg.checkpoint.string() << "\nlog: " << cfg.train_log.string() << '\n';
    } else if (*predict_cmd) {
      PipelineConfig cfg = config_from(config_path, seed);
      if (!tta_flag.empty()) cfg.tta = parse_tta(tta_flag);
      if (!post_flag.empty()) {
        const bool renorm = cfg.post.renormalize;
        cfg.post = parse_post_multipliers(post_flag, cfg.class_set);
        cfg.post.renormalize = renorm;
        cfg.post_enabled = true;
      }
      if (no_post) cfg.post_enabled = false;
      std::vector<fs::path> ckpts(checkpoints.begin(), checkpoints.end());
      const fs::path out = predict_out.empty() ? cfg.predict_out : fs::path(predict_out);
      const auto outputs = commands::cmd_predict(cfg, ckpts, predict_manifest, out, threads);
      std::cout << "wrote " << outputs.size() << " predictions to " << out.string() << '\n';
    } else if (*eval_cmd) {
      const PipelineConfig cfg = config_from(config_path, seed);
      std::optional<fs::path> report_path;
      if (!report.empty()) report_path = report;
      const auto r = commands::cmd_eval(pred_dir, gt_dir, cfg.class_set, report_path, std::cout);
      std::cout << "mIoU " << r.miou << '\n';
    } else if (*ablate_cmd) {
      const PipelineConfig cfg = config_from(config_path, seed, rcs);
      const auto r = commands::cmd_ablate(cfg, std::cout);
      std::cout << "method,mIoU,fg_mIoU,rare_recall\n";
      for (const auto& row : r.mean) {
        std::cout << row.method << ',' << row.miou << ',' << row.fg_miou << ',' << row.rare_recall << '\n';
      }
      std::cout << "wrote " << cfg.ablate_out.string() << '\n';
    }
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  } catch (const NumericError& e) {
    spdlog::error("{}", e.what());
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return 0;
}
