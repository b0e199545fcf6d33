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
#ifndef IMBALSEG_CLASS_STATS_HPP_
#define IMBALSEG_CLASS_STATS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imbalseg/dataset_io.hpp"
#include "imbalseg/types.hpp"

namespace imbalseg {

// Dataset-wide pixel statistics per class. Invalid pixels are not counted.
struct ClassStats {
  std::vector<std::uint64_t> pixel_counts;
  std::uint64_t total_valid_pixels = 0;
  std::vector<double> frequencies;

  static ClassStats from_counts(std::span<const std::uint64_t> counts);
};

// Sums the cached per-entry counts of the manifest.
ClassStats count_pixels(const SampleManifest& manifest);

// CSV `class,count,frequency`, frequencies with six decimals.
void export_stats_csv(const ClassStats& stats, const ClassSet& class_set, const std::filesystem::path& path);

struct StatsCsvRow {
  std::string name;
  std::uint64_t count = 0;
  double frequency = 0.0;
};
std::vector<StatsCsvRow> read_stats_csv(const std::filesystem::path& path);

}  // namespace imbalseg

#endif  // IMBALSEG_CLASS_STATS_HPP_
