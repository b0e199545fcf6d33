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
#ifndef IMBALSEG_TYPES_HPP_
#define IMBALSEG_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace imbalseg {

// Label value reserved for "ignore" pixels in label files.
inline constexpr std::uint8_t kIgnoreLabel = 255;
inline constexpr int kMaxClasses = 254;
inline constexpr int kInputChannels = 4;

// The set of semantic classes. Immutable once constructed.
class ClassSet {
 public:
  // Nine Agriculture-Vision classes: BG DP DR EN ND PS WA WW WC, background 0.
  ClassSet();
  ClassSet(std::vector<std::string> names, int background_id = 0);

  // Classes named "0", "1", ... with background 0.
  static ClassSet numbered(int num_classes, int background_id = 0);

  int num_classes() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int c) const { return names_.at(static_cast<std::size_t>(c)); }
  int background_id() const { return background_id_; }

  bool operator==(const ClassSet&) const = default;

 private:
  std::vector<std::string> names_;
  int background_id_ = 0;
};

// Per-pixel class indices plus an optional validity mask.
// Invalid pixels carry label 0 internally and are written back as 255.
class LabelMap {
 public:
  LabelMap() = default;
  // `valid` may be empty (all pixels valid) or have height*width entries.
  LabelMap(int height, int width, int num_classes, std::vector<std::uint8_t> labels,
           std::vector<std::uint8_t> valid = {});

  // Uniform map filled with class `c`.
  static LabelMap filled(int height, int width, int num_classes, std::uint8_t c);

  int height() const { return height_; }
  int width() const { return width_; }
  int num_classes() const { return num_classes_; }
  std::size_t size() const { return labels_.size(); }

  std::uint8_t at(int y, int x) const { return labels_[index(y, x)]; }
  bool valid_at(int y, int x) const { return valid_.empty() || valid_[index(y, x)] != 0; }
  bool has_mask() const { return !valid_.empty(); }

  std::span<const std::uint8_t> labels() const { return labels_; }
  // Empty when every pixel is valid.
  std::span<const std::uint8_t> valid() const { return valid_; }

  std::size_t valid_count() const;
  // Valid-pixel count per class.
  std::vector<std::uint64_t> class_counts() const;

  bool operator==(const LabelMap&) const = default;

 private:
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int height_ = 0;
  int width_ = 0;
  int num_classes_ = 0;
  std::vector<std::uint8_t> labels_;
  std::vector<std::uint8_t> valid_;
};

// Dense channel-major C x H x W real array. Used for logits and gradients.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
  double& at(int c, int y, int x) { return data[offset(c, y, x)]; }
  double at(int c, int y, int x) const { return data[offset(c, y, x)]; }
  std::size_t offset(int c, int y, int x) const {
    return static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }

  bool operator==(const Tensor3&) const = default;
};

// Per-pixel class probabilities, channel-major. Entries are finite and >= 0.
class ProbMap {
 public:
  ProbMap() = default;
  // Validates entries; `normalized` asserts per-pixel sums of 1 within 1e-5.
  explicit ProbMap(Tensor3 values, bool normalized = false);

  // Every pixel set to 1/C.
  static ProbMap uniform(int channels, int height, int width);

  int channels() const { return values_.channels; }
  int height() const { return values_.height; }
  int width() const { return values_.width; }
  bool normalized() const { return normalized_; }
  double at(int c, int y, int x) const { return values_.at(c, y, x); }
  const Tensor3& values() const { return values_; }
  std::span<const double> data() const { return values_.data; }

  bool operator==(const ProbMap&) const = default;

 private:
  Tensor3 values_;
  bool normalized_ = false;
};

// Four-channel (R, G, B, NIR) input image in [0, 1], channel-major.
class InputImage {
 public:
  InputImage() = default;
  InputImage(int height, int width, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  static constexpr int channels() { return kInputChannels; }
  double at(int c, int y, int x) const {
    return data_[static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)];
  }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_); }
  std::span<const double> data() const { return data_; }
  std::span<const double> plane(int c) const {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * plane_size(), plane_size());
  }

  bool operator==(const InputImage&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// Per pixel, the smallest class index attaining the maximum probability.
LabelMap argmax_map(const ProbMap& probs);

// Divides every pixel's channel vector by its sum. Throws NumericError naming
// the first pixel whose sum is zero.
ProbMap normalize(const ProbMap& probs);

}  // namespace imbalseg

#endif  // IMBALSEG_TYPES_HPP_
