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
#include "imbalseg/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "imbalseg/error.hpp"

namespace imbalseg {
namespace {

std::size_t idx(int y, int x, int w) {
  return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
}

// Builds an out_h x out_w sample where output pixel (y, x) copies source
// pixel src(y, x) from image, label and validity mask alike.
template <typename SourceFn>
Sample remap(const Sample& s, int out_h, int out_w, SourceFn src) {
  const std::size_t plane = static_cast<std::size_t>(out_h) * static_cast<std::size_t>(out_w);
  const std::size_t in_plane = s.image.plane_size();
  const auto img = s.image.data();
  const auto lab = s.label.labels();
  const auto val = s.label.valid();
  std::vector<double> data(4 * plane);
  std::vector<std::uint8_t> labels(plane);
  std::vector<std::uint8_t> valid(val.empty() ? 0 : plane);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const auto [sy, sx] = src(y, x);
      const std::size_t si = idx(sy, sx, s.width());
      const std::size_t oi = idx(y, x, out_w);
      for (std::size_t c = 0; c < 4; ++c) data[c * plane + oi] = img[c * in_plane + si];
      labels[oi] = lab[si];
      if (!val.empty()) valid[oi] = val[si];
    }
  }
  return Sample(InputImage(out_h, out_w, std::move(data)),
                LabelMap(out_h, out_w, s.label.num_classes(), std::move(labels), std::move(valid)));
}

// Window (oy, ox, out_h, out_w) of `s` resized to nh x nw: bilinear with
// half-pixel centers for the image, nearest neighbor for labels and mask.
Sample resample(const Sample& s, int nh, int nw, int oy, int ox, int out_h, int out_w) {
  const int h = s.height();
  const int w = s.width();
  const double sy_scale = static_cast<double>(nh) / h;
  const double sx_scale = static_cast<double>(nw) / w;

  const std::size_t plane = static_cast<std::size_t>(out_h) * static_cast<std::size_t>(out_w);
  const std::size_t in_plane = s.image.plane_size();
  const auto img = s.image.data();
  const auto lab = s.label.labels();
  const auto val = s.label.valid();
  std::vector<double> data(4 * plane);
  std::vector<std::uint8_t> labels(plane);
  std::vector<std::uint8_t> valid(val.empty() ? 0 : plane);

  for (int y = 0; y < out_h; ++y) {
    const double fy = (oy + y + 0.5) / sy_scale - 0.5;
    const double cy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(std::floor(cy));
    const int y1 = std::min(y0 + 1, h - 1);
    const double ty = cy - y0;
    const int ny = std::clamp(static_cast<int>(std::floor((oy + y + 0.5) / sy_scale)), 0, h - 1);
    for (int x = 0; x < out_w; ++x) {
      const double fx = (ox + x + 0.5) / sx_scale - 0.5;
      const double cx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(std::floor(cx));
      const int x1 = std::min(x0 + 1, w - 1);
      const double tx = cx - x0;
      const int nx = std::clamp(static_cast<int>(std::floor((ox + x + 0.5) / sx_scale)), 0, w - 1);
      const std::size_t oi = idx(y, x, out_w);
      for (std::size_t c = 0; c < 4; ++c) {
        const double* p = img.data() + c * in_plane;
        const double top = p[idx(y0, x0, w)] + tx * (p[idx(y0, x1, w)] - p[idx(y0, x0, w)]);
        const double bot = p[idx(y1, x0, w)] + tx * (p[idx(y1, x1, w)] - p[idx(y1, x0, w)]);
        data[c * plane + oi] = std::clamp(top + ty * (bot - top), 0.0, 1.0);
      }
      labels[oi] = lab[idx(ny, nx, w)];
      if (!val.empty()) valid[oi] = val[idx(ny, nx, w)];
    }
  }
  return Sample(InputImage(out_h, out_w, std::move(data)),
                LabelMap(out_h, out_w, s.label.num_classes(), std::move(labels), std::move(valid)));
}

// Smallest aspect-preserving rescale of `s` that covers a qh x qw quadrant.
Sample cover_resize(const Sample& s, int qh, int qw) {
  if (qh == 0 || qw == 0) return s;
  const double scale = std::max(static_cast<double>(qh) / s.height(), static_cast<double>(qw) / s.width());
  const int nh = std::max(qh, static_cast<int>(std::ceil(s.height() * scale - 1e-9)));
  const int nw = std::max(qw, static_cast<int>(std::ceil(s.width() * scale - 1e-9)));
  if (nh == s.height() && nw == s.width()) return s;
  return resample(s, nh, nw, 0, 0, nh, nw);
}

double draw_factor(Rng& rng, double strength) {
  if (strength <= 0.0) return 1.0;
  return rng.uniform(std::max(0.0, 1.0 - strength), 1.0 + strength);
}

}  // namespace

Sample::Sample(InputImage img, LabelMap lab) : image(std::move(img)), label(std::move(lab)) {
  if (image.height() != label.height() || image.width() != label.width()) {
    throw UsageError(fmt::format("image is {}x{} but label map is {}x{}", image.height(), image.width(), label.height(),
                                 label.width()));
  }
}

void AugConfig::validate() const {
  for (const auto& [name, p] : {std::pair{"hflip_prob", hflip_prob}, std::pair{"vflip_prob", vflip_prob},
                                std::pair{"rotate_prob", rotate_prob}, std::pair{"mosaic_prob", mosaic_prob}}) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError(fmt::format("augment.{} must be in [0, 1], got {}", name, p));
  }
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi)) {
    throw UsageError(fmt::format("augment scale range must satisfy 0 < lo <= hi, got ({}, {})", scale_lo, scale_hi));
  }
  if (crop_size < 2) throw UsageError("augment.crop_size must be >= 2");
  if (!(brightness >= 0.0) || !(contrast >= 0.0) || !(saturation >= 0.0)) {
    throw UsageError("jitter strengths must be >= 0");
  }
  if (!(mosaic_center_jitter >= 0.0 && mosaic_center_jitter <= 0.5)) {
    throw UsageError("augment.mosaic_center_jitter must be in [0, 0.5]");
  }
}

Sample mosaic(std::span<const Sample, 4> samples, int out_size, Rng& rng, const AugConfig& config) {
  const double j = config.mosaic_center_jitter;
  const auto draw = [&] {
    const int v = static_cast<int>(std::lround(rng.uniform(0.5 - j, 0.5 + j) * out_size));
    return std::clamp(v, 0, out_size);
  };
  const int cx = draw();
  const int cy = draw();
  const std::array<Sample, 4> tiles = {cover_resize(samples[0], cy, cx), cover_resize(samples[1], cy, out_size - cx),
                                       cover_resize(samples[2], out_size - cy, cx),
                                       cover_resize(samples[3], out_size - cy, out_size - cx)};
  return mosaic_at(tiles, out_size, cx, cy, rng);
}

Sample mosaic_at(std::span<const Sample, 4> samples, int out_size, int cx, int cy, Rng& rng) {
  if (out_size < 2) throw UsageError("mosaic output size must be >= 2");
  if (cx < 0 || cx > out_size || cy < 0 || cy > out_size) throw UsageError("mosaic center outside the output");
  const int num_classes = samples[0].label.num_classes();
  bool any_mask = false;
  for (const auto& s : samples) {
    if (s.label.num_classes() != num_classes) throw UsageError("mosaic sources disagree on the class count");
    any_mask = any_mask || s.label.has_mask();
  }

  const std::size_t plane = static_cast<std::size_t>(out_size) * static_cast<std::size_t>(out_size);
  std::vector<double> data(4 * plane);
  std::vector<std::uint8_t> labels(plane);
  std::vector<std::uint8_t> valid(any_mask ? plane : 0);

  // Quadrant rectangles: {x0, y0, w, h} in output coordinates.
  const std::array<std::array<int, 4>, 4> quads = {{{0, 0, cx, cy},
                                                    {cx, 0, out_size - cx, cy},
                                                    {0, cy, cx, out_size - cy},
                                                    {cx, cy, out_size - cx, out_size - cy}}};
  for (std::size_t q = 0; q < 4; ++q) {
    const auto [qx, qy, qw, qh] = quads[q];
    const Sample& src = samples[q];
    if (qw == 0 || qh == 0) continue;
    if (src.width() < qw || src.height() < qh) {
      throw DataError(fmt::format("mosaic tile {} is {}x{}, smaller than its {}x{} quadrant", q, src.height(),
                                  src.width(), qh, qw));
    }
    const int ox = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(src.width() - qw) + 1));
    const int oy = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(src.height() - qh) + 1));
    const std::size_t in_plane = src.image.plane_size();
    const auto img = src.image.data();
    const auto lab = src.label.labels();
    const auto val = src.label.valid();
    for (int y = 0; y < qh; ++y) {
      for (int x = 0; x < qw; ++x) {
        const std::size_t si = idx(oy + y, ox + x, src.width());
        const std::size_t oi = idx(qy + y, qx + x, out_size);
        for (std::size_t c = 0; c < 4; ++c) data[c * plane + oi] = img[c * in_plane + si];
        labels[oi] = lab[si];
        if (any_mask) valid[oi] = val.empty() ? 1 : val[si];
      }
    }
  }
  return Sample(InputImage(out_size, out_size, std::move(data)),
                LabelMap(out_size, out_size, num_classes, std::move(labels), std::move(valid)));
}

Sample hflip(const Sample& s) {
  const int w = s.width();
  return remap(s, s.height(), w, [w](int y, int x) { return std::pair{y, w - 1 - x}; });
}

Sample vflip(const Sample& s) {
  const int h = s.height();
  return remap(s, h, s.width(), [h](int y, int x) { return std::pair{h - 1 - y, x}; });
}

Sample rot90(const Sample& s, int k) {
  k = ((k % 4) + 4) % 4;
  if (k == 0) return s;
  if (s.height() != s.width()) {
    throw UsageError(fmt::format("rotation needs a square sample, got {}x{}", s.height(), s.width()));
  }
  const int n = s.height();
  switch (k) {
    case 1:
      return remap(s, n, n, [n](int y, int x) { return std::pair{n - 1 - x, y}; });
    case 2:
      return remap(s, n, n, [n](int y, int x) { return std::pair{n - 1 - y, n - 1 - x}; });
    default:
      return remap(s, n, n, [n](int y, int x) { return std::pair{x, n - 1 - y}; });
  }
}

Sample random_hflip(const Sample& s, Rng& rng, double p) { return rng.bernoulli(p) ? hflip(s) : s; }

Sample random_vflip(const Sample& s, Rng& rng, double p) { return rng.bernoulli(p) ? vflip(s) : s; }

Sample random_rot90(const Sample& s, Rng& rng, double p) {
  if (!rng.bernoulli(p)) return s;
  return rot90(s, rng.uniform_int(1, 3));
}

Sample resize_crop(const Sample& s, double scale, int crop_size, int offset_y, int offset_x) {
  const int nh = static_cast<int>(std::lround(s.height() * scale));
  const int nw = static_cast<int>(std::lround(s.width() * scale));
  if (nh < crop_size || nw < crop_size) {
    throw DataError(fmt::format("scaled size {}x{} is smaller than crop size {}", nh, nw, crop_size));
  }
  if (offset_y < 0 || offset_x < 0 || offset_y + crop_size > nh || offset_x + crop_size > nw) {
    throw UsageError("crop window outside the scaled image");
  }
  return resample(s, nh, nw, offset_y, offset_x, crop_size, crop_size);
}

Sample random_resize_crop(const Sample& s, Rng& rng, double scale_lo, double scale_hi, int crop_size) {
  const double scale = rng.uniform(scale_lo, scale_hi);
  const int nh = static_cast<int>(std::lround(s.height() * scale));
  const int nw = static_cast<int>(std::lround(s.width() * scale));
  if (nh < crop_size || nw < crop_size) {
    throw DataError(fmt::format("scaled size {}x{} is smaller than crop size {}", nh, nw, crop_size));
  }
  const int oy = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nh - crop_size) + 1));
  const int ox = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nw - crop_size) + 1));
  return resize_crop(s, scale, crop_size, oy, ox);
}

Sample apply_color_jitter(const Sample& s, const JitterFactors& f) {
  const std::size_t plane = s.image.plane_size();
  std::vector<double> data(s.image.data().begin(), s.image.data().end());
  if (f.brightness != 1.0) {
    for (double& v : data) v = std::clamp(v * f.brightness, 0.0, 1.0);
  }
  if (f.contrast != 1.0 && plane > 0) {
    for (std::size_t c = 0; c < 4; ++c) {
      double mean = 0.0;
      for (std::size_t p = 0; p < plane; ++p) mean += data[c * plane + p];
      mean /= static_cast<double>(plane);
      for (std::size_t p = 0; p < plane; ++p) {
        double& v = data[c * plane + p];
        v = std::clamp((v - mean) * f.contrast + mean, 0.0, 1.0);
      }
    }
  }
  if (f.saturation != 1.0) {
    for (std::size_t p = 0; p < plane; ++p) {
      const double gray = 0.299 * data[p] + 0.587 * data[plane + p] + 0.114 * data[2 * plane + p];
      for (std::size_t c = 0; c < 3; ++c) {
        double& v = data[c * plane + p];
        v = std::clamp(gray + (v - gray) * f.saturation, 0.0, 1.0);
      }
    }
  }
  return Sample(InputImage(s.height(), s.width(), std::move(data)), s.label);
}

Sample color_jitter(const Sample& s, Rng& rng, const JitterFactors& strengths) {
  if (strengths.brightness < 0.0 || strengths.contrast < 0.0 || strengths.saturation < 0.0) {
    throw UsageError("jitter strengths must be >= 0");
  }
  JitterFactors f;
  f.brightness = draw_factor(rng, strengths.brightness);
  f.contrast = draw_factor(rng, strengths.contrast);
  f.saturation = draw_factor(rng, strengths.saturation);
  return apply_color_jitter(s, f);
}

Sample apply_pipeline(const Sample& first, std::span<const Sample> pool, const AugConfig& config, Rng& rng) {
  config.validate();
  Sample s = first;
  if (rng.bernoulli(config.mosaic_prob)) {
    if (pool.empty()) throw UsageError("mosaic needs a non-empty sample pool");
    const std::array<Sample, 4> tiles = {first, pool[rng.uniform_index(pool.size())],
                                         pool[rng.uniform_index(pool.size())], pool[rng.uniform_index(pool.size())]};
    s = mosaic(std::span<const Sample, 4>(tiles), std::min(first.height(), first.width()), rng, config);
  }
  s = random_resize_crop(s, rng, config.scale_lo, config.scale_hi, config.crop_size);
  s = random_hflip(s, rng, config.hflip_prob);
  s = random_vflip(s, rng, config.vflip_prob);
  s = random_rot90(s, rng, config.rotate_prob);
  return color_jitter(s, rng, {config.brightness, config.contrast, config.saturation});
}

}  // namespace imbalseg
