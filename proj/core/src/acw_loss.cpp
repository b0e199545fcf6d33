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
#include "imbalseg/acw_loss.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "imbalseg/error.hpp"

namespace imbalseg {

void AcwConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw UsageError("acw.epsilon must be >= 0");
  if (!(iota >= 0.0) || !std::isfinite(iota)) throw UsageError("acw.iota must be >= 0");
}

RunningClassCounts update_running_counts(RunningClassCounts counts, std::span<const LabelMap> batch_labels) {
  for (const auto& lm : batch_labels) {
    if (static_cast<std::size_t>(lm.num_classes()) != counts.counts.size()) {
      throw UsageError("label map class count does not match running counts");
    }
    const auto add = lm.class_counts();
    for (std::size_t c = 0; c < add.size(); ++c) {
      counts.counts[c] += add[c];
      counts.total += add[c];
    }
  }
  return counts;
}

ClassWeights class_weights(const RunningClassCounts& counts, double epsilon, double iota) {
  const std::size_t n = counts.counts.size();
  if (n == 0) throw UsageError("class weights need at least one class");
  if (counts.total == 0) {
    ClassWeights w = ClassWeights::uniform(static_cast<int>(n));
    w.cold_start = true;
    return w;
  }
  const double denom = static_cast<double>(counts.total) + static_cast<double>(n) * epsilon;
  std::vector<double> raw(n);
  double sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double f = (static_cast<double>(counts.counts[c]) + epsilon) / denom;
    raw[c] = 1.0 / std::log(1.0 + iota + f);
    sum += raw[c];
  }
  if (!std::isfinite(sum) || sum <= 0.0) throw NumericError("class weights are not finite");
  for (double& r : raw) r *= static_cast<double>(n) / sum;
  return {std::move(raw), false};
}

namespace {

void check_shapes(const Tensor3& logits, const LabelMap& labels, const ClassWeights& weights) {
  if (logits.height != labels.height() || logits.width != labels.width()) {
    throw UsageError(fmt::format("logits are {}x{} but labels are {}x{}", logits.height, logits.width, labels.height(),
                                 labels.width()));
  }
  if (logits.channels != labels.num_classes() || static_cast<int>(weights.weights.size()) != logits.channels) {
    throw UsageError("logits, labels and weights disagree on the class count");
  }
}

// Accumulates the unnormalized loss sum and, when `grad` is given, writes
// w_y * (softmax - onehot) * scale into it.
double accumulate(const Tensor3& logits, const LabelMap& labels, const ClassWeights& weights, Tensor3* grad,
                  double scale) {
  const std::size_t plane = logits.plane_size();
  const int nc = logits.channels;
  const auto lab = labels.labels();
  const auto val = labels.valid();
  std::vector<double> e(static_cast<std::size_t>(nc));
  double total = 0.0;
  for (std::size_t p = 0; p < plane; ++p) {
    if (!val.empty() && !val[p]) continue;
    double mx = logits.data[p];
    for (int c = 1; c < nc; ++c) mx = std::max(mx, logits.data[static_cast<std::size_t>(c) * plane + p]);
    double z = 0.0;
    for (int c = 0; c < nc; ++c) {
      e[static_cast<std::size_t>(c)] = std::exp(logits.data[static_cast<std::size_t>(c) * plane + p] - mx);
      z += e[static_cast<std::size_t>(c)];
    }
    const std::size_t y = lab[p];
    const double w = weights.weights[y];
    total += w * (std::log(z) - (logits.data[y * plane + p] - mx));
    if (grad != nullptr) {
      for (int c = 0; c < nc; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        const double soft = e[uc] / z;
        grad->data[uc * plane + p] = w * scale * (soft - (uc == y ? 1.0 : 0.0));
      }
    }
  }
  return total;
}

}  // namespace

double weighted_ce_loss(const Tensor3& logits, const LabelMap& labels, const ClassWeights& weights) {
  check_shapes(logits, labels, weights);
  const std::size_t n = labels.valid_count();
  if (n == 0) throw DataError("loss needs at least one valid pixel");
  return accumulate(logits, labels, weights, nullptr, 0.0) / static_cast<double>(n);
}

Tensor3 loss_gradient(const Tensor3& logits, const LabelMap& labels, const ClassWeights& weights) {
  check_shapes(logits, labels, weights);
  const std::size_t n = labels.valid_count();
  if (n == 0) throw DataError("loss needs at least one valid pixel");
  Tensor3 grad(logits.channels, logits.height, logits.width, 0.0);
  accumulate(logits, labels, weights, &grad, 1.0 / static_cast<double>(n));
  return grad;
}

double batch_loss_and_gradient(std::span<const Tensor3> logits, std::span<const LabelMap> labels,
                               const ClassWeights& weights, std::vector<Tensor3>* grads) {
  if (logits.size() != labels.size()) throw UsageError("batch logits and labels differ in length");
  std::size_t n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    check_shapes(logits[i], labels[i], weights);
    n += labels[i].valid_count();
  }
  if (n == 0) throw DataError("batch has no valid pixels");
  const double scale = 1.0 / static_cast<double>(n);
  if (grads != nullptr) grads->clear();
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (grads != nullptr) {
      grads->emplace_back(logits[i].channels, logits[i].height, logits[i].width, 0.0);
      total += accumulate(logits[i], labels[i], weights, &grads->back(), scale);
    } else {
      total += accumulate(logits[i], labels[i], weights, nullptr, scale);
    }
  }
  return total * scale;
}

}  // namespace imbalseg
