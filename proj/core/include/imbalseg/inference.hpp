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
#ifndef IMBALSEG_INFERENCE_HPP_
#define IMBALSEG_INFERENCE_HPP_

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imbalseg/trainer.hpp"
#include "imbalseg/types.hpp"

namespace imbalseg {

// Per-class probability multipliers applied before the final argmax.
struct PostProcessConfig {
  std::vector<double> multipliers;
  bool renormalize = true;

  // Background x0.95, every other class x2.0.
  static PostProcessConfig defaults(const ClassSet& classes);
  // All multipliers 1.
  static PostProcessConfig neutral(const ClassSet& classes);
  void validate(int num_classes) const;
};

// Parses "bg=0.95,fg=2.0" or per-class "0=0.95,1=2.0,..." (class indices or
// names). Unlisted classes keep the defaults.
PostProcessConfig parse_post_multipliers(std::string_view text, const ClassSet& classes);

enum class TtaTransform { kIdentity, kHFlip, kVFlip, kHVFlip };

struct TtaConfig {
  std::vector<TtaTransform> transforms = {TtaTransform::kIdentity, TtaTransform::kHFlip, TtaTransform::kVFlip,
                                          TtaTransform::kHVFlip};

  static TtaConfig identity_only() { return {{TtaTransform::kIdentity}}; }
  void validate() const;
};

// "none" | "all" | comma list of identity,hflip,vflip,hvflip.
TtaConfig parse_tta(std::string_view text);
std::string format_tta(const TtaConfig& tta);

// All four transforms are involutions, so each is its own inverse.
InputImage apply_transform(const InputImage& image, TtaTransform t);
ProbMap apply_transform(const ProbMap& probs, TtaTransform t);

using Predictor = std::function<ProbMap(const InputImage&)>;

// Mean over transforms t of t^-1(predict(t(image))).
ProbMap tta_predict(const Predictor& model, const InputImage& image, const TtaConfig& tta);
ProbMap tta_predict(const ModelParams& model, const InputImage& image, const TtaConfig& tta);

// Element-wise arithmetic mean of normalized maps. Entries are summed in
// sorted order and clamped to the inputs' [min, max], which makes the result
// exactly invariant to the order of `maps`.
ProbMap ensemble_mean(std::span<const ProbMap> maps);

// Scales channel c by multipliers[c], then renormalizes if configured.
ProbMap postprocess(const ProbMap& probs, const PostProcessConfig& config);

struct NamedImage {
  std::string id;
  InputImage image;
};

struct PipelineOutput {
  std::string id;
  LabelMap labels;
  ProbMap probs;  // post-processed
};

struct PipelineOptions {
  TtaConfig tta;
  std::optional<PostProcessConfig> post;  // nullopt: no post-process
  std::optional<std::filesystem::path> out_dir;
  bool write_probs = true;  // <id>.segp next to <id>.png
  int threads = 1;
};

// Per image: TTA per model -> ensemble mean -> post-process -> argmax.
// On failure any files already written by this call are removed.
std::vector<PipelineOutput> run_pipeline(std::span<const NamedImage> images, std::span<const ModelParams> models,
                                         const PipelineOptions& options);

}  // namespace imbalseg

#endif  // IMBALSEG_INFERENCE_HPP_
