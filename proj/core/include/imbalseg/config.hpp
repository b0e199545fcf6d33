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
#ifndef IMBALSEG_CONFIG_HPP_
#define IMBALSEG_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "imbalseg/acw_loss.hpp"
#include "imbalseg/augment.hpp"
#include "imbalseg/dataset_io.hpp"
#include "imbalseg/inference.hpp"
#include "imbalseg/rcs.hpp"
#include "imbalseg/trainer.hpp"

namespace imbalseg {

// Every setting of the command-line pipeline. Populated from a plain
// `section.key=value` file; see README for the full key list.
struct PipelineConfig {
  std::uint64_t seed = 0;

  ClassSet class_set;
  std::filesystem::path train_manifest;
  std::filesystem::path test_manifest;

  SyntheticSpec synth = SyntheticSpec::default_spec();
  int synth_test_images = 16;

  RcsConfig rcs;
  AugConfig augment;
  AcwConfig acw;
  TrainConfig train;
  std::filesystem::path checkpoint = "model.segw";
  std::filesystem::path train_log = "train_log.csv";

  TtaConfig tta;
  bool post_enabled = true;
  PostProcessConfig post = PostProcessConfig::defaults(ClassSet());

  std::filesystem::path predict_out = "predictions";
  bool write_probs = true;

  std::filesystem::path eval_report = "report.csv";

  int ablate_seeds = 3;
  std::filesystem::path ablate_work_dir = "ablation";
  std::filesystem::path ablate_out = "ablation.csv";

  // Settings sized for 64x64 synthetic tiles on one CPU core.
  static PipelineConfig desk_defaults();

  // Throws UsageError on the first invalid setting.
  void validate() const;
};

// Applies `key=value` lines on top of desk_defaults(). Relative paths are
// resolved against `base_dir`. Unknown keys and malformed values are errors.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
PipelineConfig load_config(const std::filesystem::path& path);

// Serializes every key; parse_config(to_text(c)) reproduces c.
std::string to_text(const PipelineConfig& config);

// SyntheticSpec from a `key=value` file with keys shares, image_size,
// num_images, min_radius, max_radius, noise_std, offset_std.
SyntheticSpec parse_synthetic_spec(std::string_view text, const ClassSet& classes);

}  // namespace imbalseg

#endif  // IMBALSEG_CONFIG_HPP_
