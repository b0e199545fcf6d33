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
#ifndef IMBALSEG_RCS_HPP_
#define IMBALSEG_RCS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "imbalseg/class_stats.hpp"
#include "imbalseg/dataset_io.hpp"
#include "imbalseg/rng.hpp"

namespace imbalseg {

struct RcsConfig {
  bool enabled = true;
  double temperature = 0.01;
  std::uint64_t min_pixels = 1000;
  bool include_background = false;

  void validate() const;
};

// Class-sampling distribution favoring rare classes.
struct ClassDistribution {
  std::vector<double> probs;
  double temperature = 1.0;
};

// P(c) proportional to exp((1 - f_c) / T) over the included classes, computed
// with max subtraction. The background class gets probability 0 unless
// `include_background` is set.
ClassDistribution rcs_distribution(std::span<const double> frequencies, double temperature, bool include_background,
                                   int background_id = 0);
ClassDistribution rcs_distribution(const ClassStats& stats, double temperature, bool include_background,
                                   int background_id = 0);

// Inverse-CDF draw; never returns a zero-probability class.
int sample_class(const ClassDistribution& dist, Rng& rng);

// For each class, ids of manifest entries with at least `min_pixels` pixels
// of that class.
struct ClassImageIndex {
  std::uint64_t min_pixels = 1;
  std::vector<std::vector<std::string>> ids;

  bool empty(int c) const { return ids.at(static_cast<std::size_t>(c)).empty(); }
};

ClassImageIndex build_class_index(const SampleManifest& manifest, std::uint64_t min_pixels);

// Uniform draw from index[c]; throws DataError naming the class when empty.
const std::string& sample_image_for_class(const ClassImageIndex& index, int c, Rng& rng);

// Two-stage rare-class sampler over a manifest: draw a class, then an entry
// containing it. Classes without qualifying entries are redrawn; if no
// included class has any, entries are drawn uniformly.
class RareClassSampler {
 public:
  RareClassSampler(const SampleManifest& manifest, const RcsConfig& config);

  // Index into manifest.entries.
  std::size_t draw(Rng& rng) const;
  // Entry index for a forced class.
  std::size_t draw_for_class(int c, Rng& rng) const;

  const ClassDistribution& distribution() const { return dist_; }
  const ClassImageIndex& index() const { return index_; }
  bool uniform_fallback() const { return uniform_fallback_; }

 private:
  std::size_t position(const std::string& id) const;

  ClassDistribution dist_;        // as computed from the dataset
  ClassDistribution effective_;   // with unindexed classes removed
  ClassImageIndex index_;
  std::vector<std::string> ids_;  // entry ids in manifest order
  bool uniform_fallback_ = false;
};

}  // namespace imbalseg

#endif  // IMBALSEG_RCS_HPP_
