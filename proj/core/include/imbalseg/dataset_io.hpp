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
#ifndef IMBALSEG_DATASET_IO_HPP_
#define IMBALSEG_DATASET_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imbalseg/types.hpp"

namespace imbalseg {

namespace fs = std::filesystem;

// 8-bit raster, interleaved (HWC), as stored in PNG files.
struct Image8 {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> data;

  bool operator==(const Image8&) const = default;
};

// Real-valued planar raster in [0, 1], channel-major.
struct PlanarImage {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;
};

Image8 read_png(const fs::path& path);
void write_png(const Image8& image, const fs::path& path);

// Single-channel 8-bit PNG; 255 marks invalid pixels.
LabelMap read_label_map(const fs::path& path, int num_classes);
void write_label_map(const LabelMap& labels, const fs::path& path);

// SEGP probability maps: "SEGP", u32 version=1, C, H, W, reserved=0, then
// C*H*W little-endian float32 values, channel-major.
inline constexpr std::size_t kSegpHeaderSize = 24;
std::vector<std::uint8_t> encode_prob_map(const ProbMap& probs);
ProbMap decode_prob_map(std::span<const std::uint8_t> bytes);
void write_prob_map(const ProbMap& probs, const fs::path& path);
ProbMap read_prob_map(const fs::path& path);

// One binary mask per class; a pixel may be set in several masks.
struct MultiLabelMap {
  int height = 0;
  int width = 0;
  std::vector<std::vector<std::uint8_t>> masks;  // C masks of H*W values in {0, 1}
};

// Each pixel takes the first class in `priority` whose mask covers it;
// uncovered pixels take the background class.
LabelMap resolve_overlaps(const MultiLabelMap& multi, std::span<const int> priority, const ClassSet& classes);

// Classes sorted by ascending frequency (rarest first); ties by class index.
std::vector<int> rarity_priority(std::span<const double> frequencies);

InputImage concat_rgbnir(const Image8& rgb, const Image8& nir);
InputImage concat_rgbnir(const PlanarImage& rgb, const PlanarImage& nir);

struct SampleEntry {
  std::string id;
  fs::path image_rgb;
  fs::path image_nir;
  fs::path label;
  std::vector<std::uint64_t> class_pixel_counts;

  bool operator==(const SampleEntry&) const = default;
};

struct SampleManifest {
  std::vector<SampleEntry> entries;
  ClassSet class_set;

  const SampleEntry& find(const std::string& id) const;
};

// JSON lines; paths are stored relative to the manifest's directory and
// resolved against it on load. Loading validates ids, count lengths, and
// file existence.
void save_manifest(const SampleManifest& manifest, const fs::path& path);
SampleManifest load_manifest(const fs::path& path, const ClassSet& class_set);

InputImage read_input_image(const SampleEntry& entry);

// Pairs `image_dir/rgb/*.png`, `image_dir/nir/*.png`, and `label_dir/*.png`
// by basename and caches per-class valid-pixel counts.
SampleManifest build_manifest(const fs::path& image_dir, const fs::path& label_dir, const ClassSet& class_set);

// Same entries with class_pixel_counts re-decoded from the label files.
SampleManifest recount_manifest(const SampleManifest& manifest);

struct SyntheticSpec {
  ClassSet class_set;
  std::vector<double> shares;  // target global pixel share per class
  int image_size = 64;
  int num_images = 64;
  int min_radius = 4;
  int max_radius = 9;
  double noise_std = 0.10;
  double offset_std = 0.03;  // per-(image, class) appearance shift

  // Background 0.92, remaining mass split evenly across foreground classes.
  static SyntheticSpec default_spec(const ClassSet& class_set = ClassSet());
  void validate() const;
};

// Writes <out>/images/{rgb,nir}/<id>.png, <out>/labels/<id>.png and
// <out>/manifest.jsonl. Deterministic given spec and seed.
SampleManifest generate_synthetic_dataset(const SyntheticSpec& spec, const fs::path& out_dir, std::uint64_t seed);

}  // namespace imbalseg

#endif  // IMBALSEG_DATASET_IO_HPP_
