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
#ifndef IMBALSEG_ACW_LOSS_HPP_
#define IMBALSEG_ACW_LOSS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "imbalseg/types.hpp"

namespace imbalseg {

struct AcwConfig {
  bool enabled = true;
  double epsilon = 1.0;  // additive smoothing, in pixels
  double iota = 0.05;

  void validate() const;
};

// Pixels of each class seen so far in training. Only grows.
struct RunningClassCounts {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  explicit RunningClassCounts(int num_classes = 0) : counts(static_cast<std::size_t>(num_classes), 0) {}
};

struct ClassWeights {
  std::vector<double> weights;  // positive, summing to C
  bool cold_start = false;      // true when derived from zero counts

  static ClassWeights uniform(int num_classes) {
    return {std::vector<double>(static_cast<std::size_t>(num_classes), 1.0), false};
  }
};

// Adds the valid-pixel class counts of every map in the batch.
RunningClassCounts update_running_counts(RunningClassCounts counts, std::span<const LabelMap> batch_labels);

// f_c = (n_c + eps) / (N + C * eps); raw_c = 1 / ln(1 + iota + f_c);
// weights = C * raw / sum(raw). Zero total gives uniform weights flagged
// as cold start.
ClassWeights class_weights(const RunningClassCounts& counts, double epsilon, double iota = 0.05);

// Mean over valid pixels of w_y * -log softmax(logits)_y.
double weighted_ce_loss(const Tensor3& logits, const LabelMap& labels, const ClassWeights& weights);

// d loss / d logits: w_y / N_valid * (softmax_c - [c == y]); zero on invalid pixels.
Tensor3 loss_gradient(const Tensor3& logits, const LabelMap& labels, const ClassWeights& weights);

// Batch form used by the trainer: the loss is averaged over the valid pixels
// of the whole batch. When `grads` is non-null it receives one gradient per
// item. Returns the loss.
double batch_loss_and_gradient(std::span<const Tensor3> logits, std::span<const LabelMap> labels,
                               const ClassWeights& weights, std::vector<Tensor3>* grads);

}  // namespace imbalseg

#endif  // IMBALSEG_ACW_LOSS_HPP_
