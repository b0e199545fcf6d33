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
#include "imbalseg/class_stats.hpp"

#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "imbalseg/csv.hpp"
#include "imbalseg/error.hpp"

namespace imbalseg {

ClassStats ClassStats::from_counts(std::span<const std::uint64_t> counts) {
  ClassStats s;
  s.pixel_counts.assign(counts.begin(), counts.end());
  s.total_valid_pixels = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (s.total_valid_pixels == 0) throw DataError("no valid pixels to compute class frequencies");
  s.frequencies.resize(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    s.frequencies[c] = static_cast<double>(counts[c]) / static_cast<double>(s.total_valid_pixels);
  }
  return s;
}

ClassStats count_pixels(const SampleManifest& manifest) {
  if (manifest.entries.empty()) throw DataError("cannot compute class statistics of an empty manifest");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(manifest.class_set.num_classes()), 0);
  for (const auto& e : manifest.entries) {
    if (e.class_pixel_counts.size() != counts.size()) {
      throw DataError(fmt::format("entry '{}' has {} counts for {} classes", e.id, e.class_pixel_counts.size(), counts.size()));
    }
    for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += e.class_pixel_counts[c];
  }
  return ClassStats::from_counts(counts);
}

void export_stats_csv(const ClassStats& stats, const ClassSet& class_set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "class,count,frequency\n";
  for (int c = 0; c < class_set.num_classes(); ++c) {
    const auto uc = static_cast<std::size_t>(c);
    out << csv::quote(class_set.name(c)) << ',' << stats.pixel_counts.at(uc) << ','
        << fmt::format("{:.6f}", stats.frequencies.at(uc)) << '\n';
  }
  if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

std::vector<StatsCsvRow> read_stats_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  auto rows = csv::read_all(in);
  if (rows.empty() || rows.front() != std::vector<std::string>{"class", "count", "frequency"}) {
    throw DataError(fmt::format("'{}' is not a class statistics CSV", path.string()));
  }
  std::vector<StatsCsvRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) throw DataError(fmt::format("'{}' row {} has {} fields", path.string(), i, rows[i].size()));
    out.push_back({rows[i][0], std::stoull(rows[i][1]), std::stod(rows[i][2])});
  }
  return out;
}

}  // namespace imbalseg
