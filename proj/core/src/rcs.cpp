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
#include "imbalseg/rcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "imbalseg/error.hpp"

namespace imbalseg {

void RcsConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw UsageError(fmt::format("rcs.temperature must be > 0, got {}", temperature));
  }
  if (min_pixels < 1) throw UsageError("rcs.min_pixels must be >= 1");
}

ClassDistribution rcs_distribution(std::span<const double> frequencies, double temperature, bool include_background,
                                   int background_id) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw UsageError(fmt::format("RCS temperature must be > 0, got {}", temperature));
  }
  const std::size_t n = frequencies.size();
  auto included = [&](std::size_t c) { return include_background || static_cast<int>(c) != background_id; };
  double max_exp = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n; ++c) {
    const double f = frequencies[c];
    if (!(f >= 0.0 && f <= 1.0)) throw UsageError(fmt::format("class frequency {} out of [0, 1]", f));
    if (included(c)) max_exp = std::max(max_exp, (1.0 - f) / temperature);
  }
  if (!std::isfinite(max_exp)) throw UsageError("RCS distribution has no included classes");

  ClassDistribution dist{std::vector<double>(n, 0.0), temperature};
  double sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (!included(c)) continue;
    dist.probs[c] = std::exp((1.0 - frequencies[c]) / temperature - max_exp);
    sum += dist.probs[c];
  }
  for (double& p : dist.probs) p /= sum;
  return dist;
}

ClassDistribution rcs_distribution(const ClassStats& stats, double temperature, bool include_background,
                                   int background_id) {
  return rcs_distribution(stats.frequencies, temperature, include_background, background_id);
}

int sample_class(const ClassDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t c = 0; c < dist.probs.size(); ++c) {
    if (dist.probs[c] <= 0.0) continue;
    last_positive = static_cast<int>(c);
    acc += dist.probs[c];
    if (u < acc) return last_positive;
  }
  // u landed in the rounding slack above the cumulative sum.
  if (last_positive < 0) throw UsageError("cannot sample from an all-zero class distribution");
  return last_positive;
}

ClassImageIndex build_class_index(const SampleManifest& manifest, std::uint64_t min_pixels) {
  if (min_pixels < 1) throw UsageError("min_pixels must be >= 1");
  ClassImageIndex index{min_pixels, std::vector<std::vector<std::string>>(
                                        static_cast<std::size_t>(manifest.class_set.num_classes()))};
  for (const auto& e : manifest.entries) {
    for (std::size_t c = 0; c < index.ids.size(); ++c) {
      if (e.class_pixel_counts.at(c) >= min_pixels) index.ids[c].push_back(e.id);
    }
  }
  return index;
}

const std::string& sample_image_for_class(const ClassImageIndex& index, int c, Rng& rng) {
  if (c < 0 || c >= static_cast<int>(index.ids.size())) throw UsageError(fmt::format("class {} out of range", c));
  const auto& list = index.ids[static_cast<std::size_t>(c)];
  if (list.empty()) {
    throw DataError(fmt::format("no sample contains at least {} pixels of class {}", index.min_pixels, c));
  }
  return list[rng.uniform_index(list.size())];
}

RareClassSampler::RareClassSampler(const SampleManifest& manifest, const RcsConfig& config) {
  config.validate();
  if (manifest.entries.empty()) throw DataError("rare-class sampler needs a non-empty manifest");
  const ClassStats stats = count_pixels(manifest);
  const int bg = manifest.class_set.background_id();
  dist_ = rcs_distribution(stats, config.temperature, config.include_background, bg);
  index_ = build_class_index(manifest, config.min_pixels);
  for (const auto& e : manifest.entries) ids_.push_back(e.id);

  effective_ = dist_;
  double kept = 0.0;
  for (std::size_t c = 0; c < effective_.probs.size(); ++c) {
    if (effective_.probs[c] > 0.0 && index_.ids[c].empty()) {
      spdlog::warn("rare-class sampling: no sample has >= {} pixels of class {} ({}); it will be redrawn",
                   config.min_pixels, manifest.class_set.name(static_cast<int>(c)), c);
      effective_.probs[c] = 0.0;
    }
    kept += effective_.probs[c];
  }
  if (kept <= 0.0) {
    spdlog::warn("rare-class sampling: no included class has qualifying samples; sampling uniformly");
    uniform_fallback_ = true;
    return;
  }
  for (double& p : effective_.probs) p /= kept;
}

std::size_t RareClassSampler::position(const std::string& id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  return static_cast<std::size_t>(it - ids_.begin());
}

std::size_t RareClassSampler::draw(Rng& rng) const {
  if (uniform_fallback_) return rng.uniform_index(ids_.size());
  const int c = sample_class(effective_, rng);
  return position(sample_image_for_class(index_, c, rng));
}

std::size_t RareClassSampler::draw_for_class(int c, Rng& rng) const {
  return position(sample_image_for_class(index_, c, rng));
}

}  // namespace imbalseg
