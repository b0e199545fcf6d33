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
#include "imbalseg/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "imbalseg/error.hpp"

namespace imbalseg {

ClassSet::ClassSet() : ClassSet({"BG", "DP", "DR", "EN", "ND", "PS", "WA", "WW", "WC"}, 0) {}

ClassSet::ClassSet(std::vector<std::string> names, int background_id)
    : names_(std::move(names)), background_id_(background_id) {
  if (names_.size() < 2 || names_.size() > static_cast<std::size_t>(kMaxClasses)) {
    throw UsageError(fmt::format("class set needs 2..{} classes, got {}", kMaxClasses, names_.size()));
  }
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) throw UsageError("class names must be unique");
  if (background_id_ < 0 || background_id_ >= num_classes()) {
    throw UsageError(fmt::format("background id {} out of range [0, {})", background_id_, num_classes()));
  }
}

ClassSet ClassSet::numbered(int num_classes, int background_id) {
  std::vector<std::string> names;
  for (int c = 0; c < num_classes; ++c) names.push_back(std::to_string(c));
  return ClassSet(std::move(names), background_id);
}

LabelMap::LabelMap(int height, int width, int num_classes, std::vector<std::uint8_t> labels,
                   std::vector<std::uint8_t> valid)
    : height_(height), width_(width), num_classes_(num_classes), labels_(std::move(labels)), valid_(std::move(valid)) {
  if (height_ < 0 || width_ < 0) throw UsageError("negative label map dimensions");
  if (num_classes_ < 1 || num_classes_ > kMaxClasses) throw UsageError("label map class count out of range");
  const auto n = static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  if (labels_.size() != n) throw UsageError("label buffer size does not match dimensions");
  if (!valid_.empty() && valid_.size() != n) throw UsageError("validity mask size does not match dimensions");
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid_.empty()) {
      valid_[i] = valid_[i] ? 1 : 0;
      if (!valid_[i]) {
        labels_[i] = 0;
        continue;
      }
    }
    if (labels_[i] >= num_classes_) {
      throw DataError(fmt::format("label {} at (y={}, x={}) out of range [0, {})", labels_[i],
                                  i / static_cast<std::size_t>(width_), i % static_cast<std::size_t>(width_),
                                  num_classes_));
    }
  }
  // A mask with every pixel valid is the same map as no mask.
  if (!valid_.empty() && std::all_of(valid_.begin(), valid_.end(), [](std::uint8_t v) { return v != 0; })) {
    valid_.clear();
  }
}

LabelMap LabelMap::filled(int height, int width, int num_classes, std::uint8_t c) {
  return LabelMap(height, width, num_classes,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), c));
}

std::size_t LabelMap::valid_count() const {
  if (valid_.empty()) return labels_.size();
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

std::vector<std::uint64_t> LabelMap::class_counts() const {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (valid_.empty() || valid_[i]) ++counts[labels_[i]];
  }
  return counts;
}

ProbMap::ProbMap(Tensor3 values, bool normalized) : values_(std::move(values)), normalized_(normalized) {
  const std::size_t n = static_cast<std::size_t>(values_.channels) * values_.plane_size();
  if (values_.channels < 1 || values_.height < 0 || values_.width < 0 || values_.data.size() != n) {
    throw UsageError("probability map buffer does not match its dimensions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values_.data[i];
    if (!std::isfinite(v) || v < 0.0) {
      throw NumericError(fmt::format("probability entry {} is {} (must be finite and >= 0)", i, v));
    }
  }
  if (normalized_) {
    const std::size_t plane = values_.plane_size();
    for (std::size_t p = 0; p < plane; ++p) {
      double sum = 0.0;
      for (int c = 0; c < values_.channels; ++c) sum += values_.data[static_cast<std::size_t>(c) * plane + p];
      if (std::abs(sum - 1.0) > 1e-5) {
        throw NumericError(fmt::format("pixel {} sums to {} but map is flagged normalized", p, sum));
      }
    }
  }
}

ProbMap ProbMap::uniform(int channels, int height, int width) {
  return ProbMap(Tensor3(channels, height, width, 1.0 / channels), true);
}

InputImage::InputImage(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height_ < 0 || width_ < 0) throw UsageError("negative image dimensions");
  if (data_.size() != static_cast<std::size_t>(kInputChannels) * plane_size()) {
    throw UsageError(fmt::format("image buffer holds {} values, expected 4x{}x{}", data_.size(), height_, width_));
  }
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw NumericError(fmt::format("image value {} outside [0, 1]", v));
  }
}

LabelMap argmax_map(const ProbMap& probs) {
  const Tensor3& t = probs.values();
  const std::size_t plane = t.plane_size();
  std::vector<std::uint8_t> labels(plane, 0);
  for (std::size_t p = 0; p < plane; ++p) {
    int best = 0;
    double best_v = t.data[p];
    for (int c = 1; c < t.channels; ++c) {
      const double v = t.data[static_cast<std::size_t>(c) * plane + p];
      if (v > best_v) {
        best_v = v;
        best = c;
      }
    }
    labels[p] = static_cast<std::uint8_t>(best);
  }
  return LabelMap(t.height, t.width, t.channels, std::move(labels));
}

ProbMap normalize(const ProbMap& probs) {
  Tensor3 out = probs.values();
  const std::size_t plane = out.plane_size();
  for (std::size_t p = 0; p < plane; ++p) {
    double sum = 0.0;
    for (int c = 0; c < out.channels; ++c) sum += out.data[static_cast<std::size_t>(c) * plane + p];
    if (!(sum > 0.0)) {
      throw NumericError(fmt::format("cannot normalize pixel (y={}, x={}): channel sum is {}",
                                     p / static_cast<std::size_t>(out.width), p % static_cast<std::size_t>(out.width),
                                     sum));
    }
    for (int c = 0; c < out.channels; ++c) out.data[static_cast<std::size_t>(c) * plane + p] /= sum;
  }
  return ProbMap(std::move(out), true);
}

}  // namespace imbalseg
