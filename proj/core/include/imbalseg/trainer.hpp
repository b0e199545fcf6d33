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
#ifndef IMBALSEG_TRAINER_HPP_
#define IMBALSEG_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "imbalseg/acw_loss.hpp"
#include "imbalseg/augment.hpp"
#include "imbalseg/dataset_io.hpp"
#include "imbalseg/rcs.hpp"
#include "imbalseg/types.hpp"

namespace imbalseg {

// Single same-padded convolution followed by softmax. Kernel layout is
// [class][input channel][row][col].
class ModelParams {
 public:
  ModelParams() = default;
  // Zero-initialized; kernel_size must be odd.
  ModelParams(int num_classes, int kernel_size);
  ModelParams(int num_classes, int kernel_size, std::vector<double> kernel, std::vector<double> bias);

  int num_classes() const { return num_classes_; }
  int kernel_size() const { return kernel_size_; }
  std::size_t kernel_index(int c, int ch, int dy, int dx) const {
    return ((static_cast<std::size_t>(c) * kInputChannels + static_cast<std::size_t>(ch)) *
                static_cast<std::size_t>(kernel_size_) + static_cast<std::size_t>(dy)) *
               static_cast<std::size_t>(kernel_size_) + static_cast<std::size_t>(dx);
  }

  std::vector<double>& kernel() { return kernel_; }
  const std::vector<double>& kernel() const { return kernel_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  bool operator==(const ModelParams&) const = default;

 private:
  int num_classes_ = 0;
  int kernel_size_ = 0;
  std::vector<double> kernel_;
  std::vector<double> bias_;
};

struct TrainConfig {
  int max_iter = 2000;
  int batch_size = 4;
  double lr0 = 0.1;
  double power = 0.9;
  int warmup_iters = -1;  // negative: 5% of max_iter
  double weight_decay = 1e-4;
  int kernel_size = 5;
  std::uint64_t seed = 0;

  // Published large-scale settings: lr 6e-6, batch 16, 160000 iterations,
  // weight decay 0.01, power 0.9.
  static TrainConfig large_scale();

  int effective_warmup() const { return warmup_iters < 0 ? max_iter / 20 : warmup_iters; }
  void validate() const;
};

// Linear warm-up lr0 * (iter + 1) / warmup for iter < warmup, then
// lr0 * (1 - iter / max_iter)^power.
double poly_lr(int iter, const TrainConfig& config);

// Logits C x H x W; reflect padding at the borders.
Tensor3 forward(const ModelParams& params, const InputImage& image);

// Gradient of a scalar loss w.r.t. the parameters given d loss / d logits.
ModelParams param_gradient(const ModelParams& params, const InputImage& image, const Tensor3& grad_logits);

// Per-pixel softmax of the logits.
ProbMap predict(const ModelParams& params, const InputImage& image);

struct TrainLogRow {
  int iter = 0;
  double lr = 0.0;
  double loss = 0.0;
  std::vector<double> weights;

  bool operator==(const TrainLogRow&) const = default;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;

  bool operator==(const TrainLog&) const = default;
};

struct TrainResult {
  ModelParams params;
  TrainLog log;
};

// Plain SGD with decoupled weight decay on the kernel:
//   w <- w * (1 - lr * wd) - lr * grad.
// Batches are drawn by rare-class sampling when rcs.enabled, uniformly
// otherwise, and passed through the augmentation pipeline. Deterministic
// given config.seed.
TrainResult train(const TrainConfig& config, const SampleManifest& manifest, std::span<const Sample> samples,
                  const RcsConfig& rcs, const AugConfig& aug, const AcwConfig& acw);
TrainResult train(const TrainConfig& config, const SampleManifest& manifest, const RcsConfig& rcs,
                  const AugConfig& aug, const AcwConfig& acw);

// Reads every manifest entry into memory, in manifest order.
std::vector<Sample> load_samples(const SampleManifest& manifest);

// SEGW checkpoint: "SEGW", u32 version=1, u32 C, u32 k, kernel then bias as
// little-endian float64.
std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params);
ModelParams decode_checkpoint(std::span<const std::uint8_t> bytes);
void write_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams read_checkpoint(const std::filesystem::path& path);

// CSV: iter,lr,loss,w_0..w_{C-1}; values printed in shortest round-trip form.
void write_train_log(const TrainLog& log, const std::filesystem::path& path);

}  // namespace imbalseg

#endif  // IMBALSEG_TRAINER_HPP_
