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
#ifndef IMBALSEG_COMMANDS_HPP_
#define IMBALSEG_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "imbalseg/class_stats.hpp"
#include "imbalseg/config.hpp"
#include "imbalseg/inference.hpp"
#include "imbalseg/metrics.hpp"
#include "imbalseg/trainer.hpp"

// Library side of the `imbalseg` subcommands. Each returns its in-memory
// result so it can be driven from tests as well as from the CLI.
namespace imbalseg::commands {

namespace fs = std::filesystem;

ClassStats cmd_stats(const fs::path& manifest, const ClassSet& classes, const fs::path& out_csv, bool recount);

SampleManifest cmd_synth(const SyntheticSpec& spec, const fs::path& out_dir, std::uint64_t seed, std::ostream& log);

// Trains on config.train_manifest; writes config.checkpoint and config.train_log.
TrainResult cmd_train(const PipelineConfig& config);

// Runs the inference pipeline over every manifest entry. More than one
// checkpoint means an ensemble.
std::vector<PipelineOutput> cmd_predict(const PipelineConfig& config, const std::vector<fs::path>& checkpoints,
                                        const fs::path& manifest, const fs::path& out_dir, int threads);

struct EvalResult {
  ConfusionMatrix cm;
  ClassIoU ious;
  double miou = 0.0;
};

// Compares `<pred_dir>/<id>.png` against `<gt_dir>/<id>.png` for every
// ground-truth file; writes a one-row report when `report` is set.
EvalResult cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir, const ClassSet& classes,
                    const std::optional<fs::path>& report, std::ostream& log);

struct AblationRow {
  std::string method;
  double miou = 0.0;
  double fg_miou = 0.0;      // mean IoU over present non-background classes
  double rare_recall = 0.0;  // mean recall over non-background classes in the ground truth
};

struct AblationSeedResult {
  std::uint64_t seed = 0;
  std::vector<AblationRow> rows;  // baseline, +ACW, +ACW+RCS_Mosaic, +ACW+RCS_Mosaic+Post
};

struct AblationResult {
  std::vector<AblationSeedResult> per_seed;
  std::vector<AblationRow> mean;  // averaged over seeds, same order
};

// Trains the three model variants per seed on freshly generated synthetic
// data, evaluates them on a held-out synthetic split, and writes
// config.ablate_out (seed means) plus `<stem>.per_seed.csv`.
AblationResult cmd_ablate(const PipelineConfig& config, std::ostream& log);

// Metrics for one set of predictions against ground truth.
AblationRow score_predictions(const std::string& method, const std::vector<LabelMap>& preds,
                              const std::vector<LabelMap>& gts, const ClassSet& classes);

}  // namespace imbalseg::commands

#endif  // IMBALSEG_COMMANDS_HPP_
