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
#ifndef IMBALSEG_AUGMENT_HPP_
#define IMBALSEG_AUGMENT_HPP_

#include <array>
#include <span>

#include "imbalseg/rng.hpp"
#include "imbalseg/types.hpp"

namespace imbalseg {

// An image with its label map; both share the same dimensions.
struct Sample {
  InputImage image;
  LabelMap label;

  Sample() = default;
  Sample(InputImage image, LabelMap label);

  int height() const { return label.height(); }
  int width() const { return label.width(); }

  bool operator==(const Sample&) const = default;
};

struct AugConfig {
  int crop_size = 512;
  double hflip_prob = 0.5;
  double vflip_prob = 0.5;
  double rotate_prob = 0.5;
  double scale_lo = 0.5;
  double scale_hi = 2.0;
  double brightness = 0.2;
  double contrast = 0.2;
  double saturation = 0.2;
  double mosaic_prob = 0.5;
  double mosaic_center_jitter = 0.25;

  void validate() const;
};

struct JitterFactors {
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
};

// Mosaic with a center drawn uniformly in (0.5 +- jitter) * out_size per axis.
// Each tile is first rescaled (aspect kept) to the smallest size covering its
// quadrant, so the crop keeps as much of the source as the quadrant allows.
Sample mosaic(std::span<const Sample, 4> samples, int out_size, Rng& rng, const AugConfig& config);
// Mosaic around a fixed center (cx, cy); quadrants TL, TR, BL, BR come from
// samples 0..3, each cropped at a random position inside its source.
Sample mosaic_at(std::span<const Sample, 4> samples, int out_size, int cx, int cy, Rng& rng);

Sample hflip(const Sample& s);
Sample vflip(const Sample& s);
// Clockwise rotation by k * 90 degrees; square inputs only.
Sample rot90(const Sample& s, int k);

Sample random_hflip(const Sample& s, Rng& rng, double p);
Sample random_vflip(const Sample& s, Rng& rng, double p);
// With probability p rotates by k * 90 degrees, k uniform in {1, 2, 3}.
Sample random_rot90(const Sample& s, Rng& rng, double p);

// Scales by s ~ U[lo, hi] (bilinear image, nearest-neighbor labels), then
// crops a random crop_size window.
Sample random_resize_crop(const Sample& s, Rng& rng, double scale_lo, double scale_hi, int crop_size);
Sample resize_crop(const Sample& s, double scale, int crop_size, int offset_y, int offset_x);

// Brightness and contrast act on all four channels, saturation on RGB only.
// Factors are drawn from [max(0, 1 - strength), 1 + strength].
Sample color_jitter(const Sample& s, Rng& rng, const JitterFactors& strengths);
Sample apply_color_jitter(const Sample& s, const JitterFactors& factors);

// mosaic (with probability mosaic_prob; `first` is the top-left tile, the
// other three drawn uniformly from `pool`) -> resize-crop -> flips ->
// rotation -> color jitter.
Sample apply_pipeline(const Sample& first, std::span<const Sample> pool, const AugConfig& config, Rng& rng);

}  // namespace imbalseg

#endif  // IMBALSEG_AUGMENT_HPP_
