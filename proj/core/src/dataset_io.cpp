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
#include "imbalseg/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include <fmt/format.h>
#include <png.h>
#include <nlohmann/json.hpp>

#include "imbalseg/error.hpp"
#include "imbalseg/rng.hpp"

namespace imbalseg {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[off + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

// Appearance (R, G, B, NIR) means of the synthetic classes. Some pairs are
// deliberately close so the task is learnable but not separable per pixel.
constexpr std::array<std::array<double, 4>, 9> kClassMeans = {{
    {0.40, 0.45, 0.35, 0.50},  // BG
    {0.30, 0.55, 0.30, 0.65},  // DP
    {0.60, 0.50, 0.35, 0.40},  // DR
    {0.48, 0.40, 0.28, 0.62},  // EN
    {0.55, 0.60, 0.30, 0.45},  // ND
    {0.33, 0.35, 0.42, 0.38},  // PS
    {0.20, 0.28, 0.48, 0.15},  // WA
    {0.28, 0.40, 0.47, 0.30},  // WW
    {0.34, 0.62, 0.24, 0.72},  // WC
}};

std::array<double, 4> class_mean(int c) {
  if (c < static_cast<int>(kClassMeans.size())) return kClassMeans[static_cast<std::size_t>(c)];
  Rng r(mix_seed(static_cast<std::uint64_t>(c)));
  std::array<double, 4> m{};
  for (double& v : m) v = r.uniform(0.15, 0.75);
  return m;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Image8 read_png(const fs::path& path) {
  if (!fs::exists(path)) throw DataError(fmt::format("missing file '{}'", path.string()));
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  const std::string name = path.string();
  if (!png_image_begin_read_from_file(&image, name.c_str())) {
    throw DataError(fmt::format("malformed PNG '{}': {}", name, image.message));
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image8 out;
  out.height = static_cast<int>(image.height);
  out.width = static_cast<int>(image.width);
  out.channels = color ? 3 : 1;
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError(fmt::format("malformed PNG '{}': {}", name, image.message));
  }
  return out;
}

void write_png(const Image8& img, const fs::path& path) {
  if (img.channels != 1 && img.channels != 3) throw UsageError("PNG writer supports 1 or 3 channels");
  if (img.data.size() != static_cast<std::size_t>(img.height) * static_cast<std::size_t>(img.width) *
                             static_cast<std::size_t>(img.channels)) {
    throw UsageError("PNG buffer size does not match dimensions");
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::string name = path.string();
  if (!png_image_write_to_file(&image, name.c_str(), 0, img.data.data(), 0, nullptr)) {
    throw DataError(fmt::format("cannot write PNG '{}': {}", name, image.message));
  }
}

LabelMap read_label_map(const fs::path& path, int num_classes) {
  if (!fs::exists(path)) throw DataError(fmt::format("missing label file '{}'", path.string()));
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  const std::string name = path.string();
  if (!png_image_begin_read_from_file(&image, name.c_str())) {
    throw DataError(fmt::format("malformed PNG '{}': {}", name, image.message));
  }
  if ((image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_LINEAR |
                       PNG_FORMAT_FLAG_COLORMAP)) != 0) {
    png_image_free(&image);
    throw DataError(fmt::format("label file '{}' is not a single-channel 8-bit PNG", name));
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError(fmt::format("malformed PNG '{}': {}", name, image.message));
  }
  const int h = static_cast<int>(image.height);
  const int w = static_cast<int>(image.width);
  std::vector<std::uint8_t> valid;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == kIgnoreLabel) {
      if (valid.empty()) valid.assign(raw.size(), 1);
      valid[i] = 0;
      raw[i] = 0;
    } else if (raw[i] >= num_classes) {
      throw DataError(fmt::format("label file '{}': value {} at (y={}, x={}) out of range [0, {})", name, raw[i],
                                  i / static_cast<std::size_t>(w), i % static_cast<std::size_t>(w), num_classes));
    }
  }
  return LabelMap(h, w, num_classes, std::move(raw), std::move(valid));
}

void write_label_map(const LabelMap& labels, const fs::path& path) {
  Image8 img{labels.height(), labels.width(), 1, {labels.labels().begin(), labels.labels().end()}};
  if (labels.has_mask()) {
    const auto valid = labels.valid();
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      if (!valid[i]) img.data[i] = kIgnoreLabel;
    }
  }
  write_png(img, path);
}

std::vector<std::uint8_t> encode_prob_map(const ProbMap& probs) {
  const auto data = probs.data();
  std::vector<std::uint8_t> out;
  out.reserve(kSegpHeaderSize + 4 * data.size());
  out.insert(out.end(), {'S', 'E', 'G', 'P'});
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(probs.channels()));
  put_u32(out, static_cast<std::uint32_t>(probs.height()));
  put_u32(out, static_cast<std::uint32_t>(probs.width()));
  put_u32(out, 0);
  for (double v : data) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

ProbMap decode_prob_map(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSegpHeaderSize || std::memcmp(bytes.data(), "SEGP", 4) != 0) {
    throw DataError("bad SEGP magic");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != 1) throw DataError(fmt::format("unsupported SEGP version {}", version));
  const std::uint64_t c = get_u32(bytes, 8);
  const std::uint64_t h = get_u32(bytes, 12);
  const std::uint64_t w = get_u32(bytes, 16);
  if (c == 0) throw DataError("SEGP map has zero channels");
  const std::uint64_t expected = kSegpHeaderSize + 4 * c * h * w;
  if (bytes.size() != expected) {
    throw DataError(fmt::format("SEGP size mismatch: header implies {} bytes, got {}", expected, bytes.size()));
  }
  Tensor3 t(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    const float v = std::bit_cast<float>(get_u32(bytes, kSegpHeaderSize + 4 * i));
    if (!std::isfinite(v)) throw DataError(fmt::format("SEGP value {} is not finite", i));
    if (v < 0.0f) throw DataError(fmt::format("SEGP value {} is negative", i));
    t.data[i] = v;
  }
  // Flag as normalized when every pixel sums to 1 at float precision.
  bool normalized = true;
  const std::size_t plane = t.plane_size();
  for (std::size_t p = 0; p < plane && normalized; ++p) {
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) s += t.data[k * plane + p];
    normalized = std::abs(s - 1.0) <= 1e-5;
  }
  return ProbMap(std::move(t), normalized);
}

void write_prob_map(const ProbMap& probs, const fs::path& path) { write_file(path, encode_prob_map(probs)); }

ProbMap read_prob_map(const fs::path& path) { return decode_prob_map(read_file(path)); }

LabelMap resolve_overlaps(const MultiLabelMap& multi, std::span<const int> priority, const ClassSet& classes) {
  const int num_classes = classes.num_classes();
  if (static_cast<int>(multi.masks.size()) != num_classes) {
    throw UsageError(fmt::format("expected {} masks, got {}", num_classes, multi.masks.size()));
  }
  std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
  if (static_cast<int>(priority.size()) != num_classes) throw UsageError("priority is not a permutation of the classes");
  for (int c : priority) {
    if (c < 0 || c >= num_classes || seen[static_cast<std::size_t>(c)]) {
      throw UsageError("priority is not a permutation of the classes");
    }
    seen[static_cast<std::size_t>(c)] = true;
  }
  const std::size_t n = static_cast<std::size_t>(multi.height) * static_cast<std::size_t>(multi.width);
  for (const auto& m : multi.masks) {
    if (m.size() != n) throw UsageError("mask size does not match dimensions");
  }
  std::vector<std::uint8_t> labels(n, static_cast<std::uint8_t>(classes.background_id()));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c : priority) {
      if (multi.masks[static_cast<std::size_t>(c)][i]) {
        labels[i] = static_cast<std::uint8_t>(c);
        break;
      }
    }
  }
  return LabelMap(multi.height, multi.width, num_classes, std::move(labels));
}

std::vector<int> rarity_priority(std::span<const double> frequencies) {
  std::vector<int> order(frequencies.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return frequencies[static_cast<std::size_t>(a)] < frequencies[static_cast<std::size_t>(b)];
  });
  return order;
}

InputImage concat_rgbnir(const Image8& rgb, const Image8& nir) {
  if (rgb.channels != 3 || nir.channels != 1) throw UsageError("expected a 3-channel RGB and a 1-channel NIR image");
  if (rgb.height != nir.height || rgb.width != nir.width) {
    throw DataError(fmt::format("RGB is {}x{} but NIR is {}x{}", rgb.height, rgb.width, nir.height, nir.width));
  }
  const std::size_t plane = static_cast<std::size_t>(rgb.height) * static_cast<std::size_t>(rgb.width);
  std::vector<double> data(4 * plane);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < 3; ++c) data[c * plane + p] = rgb.data[3 * p + c] / 255.0;
    data[3 * plane + p] = nir.data[p] / 255.0;
  }
  return InputImage(rgb.height, rgb.width, std::move(data));
}

InputImage concat_rgbnir(const PlanarImage& rgb, const PlanarImage& nir) {
  if (rgb.channels != 3 || nir.channels != 1) throw UsageError("expected a 3-channel RGB and a 1-channel NIR image");
  if (rgb.height != nir.height || rgb.width != nir.width) {
    throw DataError(fmt::format("RGB is {}x{} but NIR is {}x{}", rgb.height, rgb.width, nir.height, nir.width));
  }
  std::vector<double> data = rgb.data;
  data.insert(data.end(), nir.data.begin(), nir.data.end());
  return InputImage(rgb.height, rgb.width, std::move(data));
}

const SampleEntry& SampleManifest::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return e;
  }
  throw DataError(fmt::format("no manifest entry with id '{}'", id));
}

void save_manifest(const SampleManifest& manifest, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write manifest '{}'", path.string()));
  auto rel = [&](const fs::path& p) { return fs::absolute(p).lexically_relative(base).generic_string(); };
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["image_rgb"] = rel(e.image_rgb);
    j["image_nir"] = rel(e.image_nir);
    j["label"] = rel(e.label);
    j["counts"] = e.class_pixel_counts;
    out << j.dump() << '\n';
  }
}

SampleManifest load_manifest(const fs::path& path, const ClassSet& class_set) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open manifest '{}'", path.string()));
  const fs::path base = fs::absolute(path).parent_path();
  SampleManifest manifest{{}, class_set};
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SampleEntry e;
    try {
      const auto j = nlohmann::json::parse(line);
      e.id = j.at("id").get<std::string>();
      e.image_rgb = base / j.at("image_rgb").get<std::string>();
      e.image_nir = base / j.at("image_nir").get<std::string>();
      e.label = base / j.at("label").get<std::string>();
      e.class_pixel_counts = j.at("counts").get<std::vector<std::uint64_t>>();
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(fmt::format("manifest '{}' line {}: {}", path.string(), line_no, ex.what()));
    }
    if (static_cast<int>(e.class_pixel_counts.size()) != class_set.num_classes()) {
      throw DataError(fmt::format("manifest '{}' line {}: {} counts for {} classes", path.string(), line_no,
                                  e.class_pixel_counts.size(), class_set.num_classes()));
    }
    if (!ids.insert(e.id).second) throw DataError(fmt::format("duplicate manifest id '{}'", e.id));
    for (const auto* p : {&e.image_rgb, &e.image_nir, &e.label}) {
      if (!fs::exists(*p)) throw DataError(fmt::format("manifest entry '{}' references missing file '{}'", e.id, p->string()));
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

InputImage read_input_image(const SampleEntry& entry) {
  return concat_rgbnir(read_png(entry.image_rgb), read_png(entry.image_nir));
}

namespace {

std::map<std::string, fs::path> png_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(fmt::format("'{}' is not a directory", dir.string()));
  std::map<std::string, fs::path> out;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (de.is_regular_file() && de.path().extension() == ".png") out[de.path().stem().string()] = de.path();
  }
  return out;
}

}  // namespace

SampleManifest build_manifest(const fs::path& image_dir, const fs::path& label_dir, const ClassSet& class_set) {
  const auto rgb = png_files(image_dir / "rgb");
  const auto nir = png_files(image_dir / "nir");
  const auto labels = png_files(label_dir);
  for (const auto& [id, p] : labels) {
    if (!rgb.contains(id) || !nir.contains(id)) throw DataError(fmt::format("label '{}' has no matching image", p.string()));
  }
  for (const auto& [id, p] : rgb) {
    if (!labels.contains(id)) throw DataError(fmt::format("image '{}' has no matching label", p.string()));
    if (!nir.contains(id)) throw DataError(fmt::format("image '{}' has no matching NIR band", p.string()));
  }
  for (const auto& [id, p] : nir) {
    if (!rgb.contains(id)) throw DataError(fmt::format("NIR band '{}' has no matching RGB image", p.string()));
  }
  SampleManifest manifest{{}, class_set};
  for (const auto& [id, label_path] : labels) {
    SampleEntry e{id, rgb.at(id), nir.at(id), label_path, {}};
    e.class_pixel_counts = read_label_map(label_path, class_set.num_classes()).class_counts();
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

SampleManifest recount_manifest(const SampleManifest& manifest) {
  SampleManifest out = manifest;
  for (auto& e : out.entries) {
    e.class_pixel_counts = read_label_map(e.label, manifest.class_set.num_classes()).class_counts();
  }
  return out;
}

SyntheticSpec SyntheticSpec::default_spec(const ClassSet& class_set) {
  SyntheticSpec spec{class_set, {}};
  const int c = class_set.num_classes();
  spec.shares.assign(static_cast<std::size_t>(c), 0.08 / (c - 1));
  spec.shares[static_cast<std::size_t>(class_set.background_id())] = 0.92;
  return spec;
}

void SyntheticSpec::validate() const {
  if (static_cast<int>(shares.size()) != class_set.num_classes()) {
    throw UsageError(fmt::format("{} shares for {} classes", shares.size(), class_set.num_classes()));
  }
  double sum = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0)) throw UsageError("class shares must be non-negative");
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw UsageError(fmt::format("class shares sum to {}, expected 1", sum));
  if (image_size < 8) throw UsageError("synthetic image_size must be >= 8");
  if (num_images < 1) throw UsageError("synthetic num_images must be >= 1");
  if (min_radius < 1 || max_radius < min_radius || 2 * max_radius >= image_size) {
    throw UsageError("synthetic blob radii must satisfy 1 <= min <= max < image_size/2");
  }
  if (!(noise_std >= 0.0) || !(offset_std >= 0.0)) throw UsageError("synthetic noise levels must be >= 0");
}

SampleManifest generate_synthetic_dataset(const SyntheticSpec& spec, const fs::path& out_dir, std::uint64_t seed) {
  spec.validate();
  const int num_classes = spec.class_set.num_classes();
  const auto bg = static_cast<std::uint8_t>(spec.class_set.background_id());
  const int size = spec.image_size;
  const std::size_t plane = static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  const std::uint64_t total = plane * static_cast<std::size_t>(spec.num_images);

  std::error_code ec;
  fs::create_directories(out_dir / "images" / "rgb", ec);
  fs::create_directories(out_dir / "images" / "nir", ec);
  fs::create_directories(out_dir / "labels", ec);
  if (ec || !fs::is_directory(out_dir / "labels")) {
    throw DataError(fmt::format("cannot create output directory '{}'", out_dir.string()));
  }

  Rng layout_rng(derive_seed(seed, "synth.layout"));
  Rng appearance_rng(derive_seed(seed, "synth.appearance"));

  std::vector<std::vector<std::uint8_t>> labels(static_cast<std::size_t>(spec.num_images),
                                                std::vector<std::uint8_t>(plane, bg));
  std::vector<std::uint64_t> realized(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::uint64_t> target(static_cast<std::size_t>(num_classes), 0);
  for (int c = 0; c < num_classes; ++c) {
    if (c != bg) target[static_cast<std::size_t>(c)] = static_cast<std::uint64_t>(std::llround(spec.shares[static_cast<std::size_t>(c)] * static_cast<double>(total)));
  }

  // Round-robin blob placement: each pass paints one blob for every class
  // still below its pixel budget. Blobs only cover background pixels.
  int stalled = 0;
  for (;;) {
    bool any_active = false;
    for (int c = 0; c < num_classes; ++c) {
      const auto uc = static_cast<std::size_t>(c);
      if (c == bg || realized[uc] >= target[uc]) continue;
      any_active = true;
      auto& img = labels[layout_rng.uniform_index(static_cast<std::uint64_t>(spec.num_images))];
      const int cy = layout_rng.uniform_int(0, size - 1);
      const int cx = layout_rng.uniform_int(0, size - 1);
      // Union of up to three discs around the center gives irregular shapes.
      const int lobes = layout_rng.uniform_int(1, 3);
      std::uint64_t painted = 0;
      for (int l = 0; l < lobes; ++l) {
        const int r = layout_rng.uniform_int(spec.min_radius, spec.max_radius);
        const int oy = l == 0 ? 0 : layout_rng.uniform_int(-r, r);
        const int ox = l == 0 ? 0 : layout_rng.uniform_int(-r, r);
        for (int y = std::max(0, cy + oy - r); y <= std::min(size - 1, cy + oy + r); ++y) {
          for (int x = std::max(0, cx + ox - r); x <= std::min(size - 1, cx + ox + r); ++x) {
            const int dy = y - cy - oy;
            const int dx = x - cx - ox;
            if (dy * dy + dx * dx > r * r) continue;
            auto& v = img[static_cast<std::size_t>(y) * static_cast<std::size_t>(size) + static_cast<std::size_t>(x)];
            if (v == bg) {
              v = static_cast<std::uint8_t>(c);
              ++painted;
            }
          }
        }
      }
      realized[uc] += painted;
      stalled = painted == 0 ? stalled + 1 : 0;
      if (stalled > 10000) throw DataError("synthetic generator ran out of background area for the requested shares");
    }
    if (!any_active) break;
  }

  SampleManifest manifest{{}, spec.class_set};
  for (int i = 0; i < spec.num_images; ++i) {
    const auto& lab = labels[static_cast<std::size_t>(i)];
    // Per-(image, class) appearance shift on top of the class mean.
    std::vector<std::array<double, 4>> means(static_cast<std::size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
      auto m = class_mean(c);
      for (double& v : m) v += appearance_rng.normal(0.0, spec.offset_std);
      means[static_cast<std::size_t>(c)] = m;
    }
    Image8 rgb{size, size, 3, std::vector<std::uint8_t>(3 * plane)};
    Image8 nir{size, size, 1, std::vector<std::uint8_t>(plane)};
    for (std::size_t p = 0; p < plane; ++p) {
      const auto& m = means[lab[p]];
      for (std::size_t ch = 0; ch < 3; ++ch) rgb.data[3 * p + ch] = to_byte(appearance_rng.normal(m[ch], spec.noise_std));
      nir.data[p] = to_byte(appearance_rng.normal(m[3], spec.noise_std));
    }
    const std::string id = fmt::format("{:05d}", i);
    SampleEntry e{id, out_dir / "images" / "rgb" / (id + ".png"), out_dir / "images" / "nir" / (id + ".png"),
                  out_dir / "labels" / (id + ".png"), {}};
    write_png(rgb, e.image_rgb);
    write_png(nir, e.image_nir);
    const LabelMap map(size, size, num_classes, lab);
    write_label_map(map, e.label);
    e.class_pixel_counts = map.class_counts();
    manifest.entries.push_back(std::move(e));
  }
  save_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace imbalseg
