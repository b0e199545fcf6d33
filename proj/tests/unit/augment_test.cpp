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

#include <array>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "imbalseg/config.hpp"
#include "imbalseg/error.hpp"
#include "imbalseg/rcs.hpp"
#include "test_util.hpp"

namespace imbalseg {
namespace {

Sample solid(int h, int w, double value, std::uint8_t label, int num_classes = 9) {
  return Sample(InputImage(h, w, std::vector<double>(static_cast<std::size_t>(4 * h * w), value)),
                LabelMap::filled(h, w, num_classes, label));
}

// Channel 0 holds a unique pixel id / 253 and valid pixels carry the id as
// label, so any geometric op must keep image, label and mask in lockstep.
Sample coordinate_sample(int h, int w) {
  std::vector<double> data(static_cast<std::size_t>(4 * h * w));
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(h * w)), valid(labels.size());
  for (int i = 0; i < h * w; ++i) {
    labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    valid[static_cast<std::size_t>(i)] = i % 3 == 0 ? 0 : 1;
    for (int c = 0; c < 4; ++c) data[static_cast<std::size_t>(c * h * w + i)] = i / 253.0;
  }
  return Sample(InputImage(h, w, std::move(data)), LabelMap(h, w, 254, std::move(labels), std::move(valid)));
}

void expect_consistent(const Sample& s) {
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) {
      const int id = static_cast<int>(std::lround(s.image.at(0, y, x) * 253.0));
      ASSERT_EQ(s.label.valid_at(y, x), id % 3 != 0);
      if (s.label.valid_at(y, x)) {
        ASSERT_EQ(s.label.at(y, x), id);
      }
    }
  }
}

std::vector<std::uint64_t> histogram(const LabelMap& m) {
  std::vector<std::uint64_t> h(static_cast<std::size_t>(m.num_classes()), 0);
  for (auto v : m.labels()) ++h[v];
  return h;
}

TEST(MosaicTest, CenteredSolidQuadrants) {
  const std::array<Sample, 4> src = {solid(8, 8, 0.1, 1), solid(8, 8, 0.2, 2), solid(8, 8, 0.3, 3),
                                     solid(8, 8, 0.4, 4)};
  Rng rng(1);
  const Sample m = mosaic_at(src, 8, 4, 4, rng);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const int q = (y >= 4 ? 2 : 0) + (x >= 4 ? 1 : 0);
      ASSERT_EQ(m.label.at(y, x), q + 1);
      ASSERT_DOUBLE_EQ(m.image.at(3, y, x), 0.1 * (q + 1));
    }
  }
}

TEST(MosaicTest, OffCenterQuadrantAreas) {
  const int s = 16;
  const std::array<Sample, 4> src = {solid(s, s, 0.1, 1), solid(s, s, 0.2, 2), solid(s, s, 0.3, 3),
                                     solid(s, s, 0.4, 4)};
  Rng rng(2);
  const Sample m = mosaic_at(src, s, s / 4, s / 4, rng);
  const auto h = histogram(m.label);
  EXPECT_EQ(h[1], 4u * 4u);
  EXPECT_EQ(h[2], 12u * 4u);
  EXPECT_EQ(h[3], 4u * 12u);
  EXPECT_EQ(h[4], 12u * 12u);
}

TEST(MosaicTest, HistogramIsSumOfCrops) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<Sample, 4> src;
    for (int q = 0; q < 4; ++q) {
      // Disjoint classes per source: 2q+1 and 2q+2.
      Sample base = testing::random_sample(20, 20, 2, rng);
      std::vector<std::uint8_t> labels(base.label.labels().begin(), base.label.labels().end());
      for (auto& l : labels) l = static_cast<std::uint8_t>(l + 2 * q + 1);
      src[static_cast<std::size_t>(q)] = Sample(base.image, LabelMap(20, 20, 9, labels));
    }
    const int cx = rng.uniform_int(0, 16), cy = rng.uniform_int(0, 16);
    Rng a(trial), b(trial);
    const Sample m = mosaic_at(src, 16, cx, cy, a);
    // Recompute the crops with the same rng stream.
    const std::array<std::array<int, 4>, 4> quads = {
        {{0, 0, cx, cy}, {cx, 0, 16 - cx, cy}, {0, cy, cx, 16 - cy}, {cx, cy, 16 - cx, 16 - cy}}};
    std::vector<std::uint64_t> expected(9, 0);
    for (std::size_t q = 0; q < 4; ++q) {
      const auto [qx, qy, qw, qh] = quads[q];
      if (qw == 0 || qh == 0) continue;
      const int ox = static_cast<int>(b.uniform_index(static_cast<std::uint64_t>(20 - qw) + 1));
      const int oy = static_cast<int>(b.uniform_index(static_cast<std::uint64_t>(20 - qh) + 1));
      for (int y = 0; y < qh; ++y) {
        for (int x = 0; x < qw; ++x) ++expected[src[q].label.at(oy + y, ox + x)];
      }
    }
    EXPECT_EQ(histogram(m.label), expected);
  }
}

TEST(MosaicTest, RejectsSmallSources) {
  const std::array<Sample, 4> src = {solid(8, 8, 0.1, 1), solid(8, 8, 0.2, 2), solid(8, 8, 0.3, 3),
                                     solid(4, 4, 0.4, 4)};
  Rng rng(1);
  EXPECT_THROW(mosaic_at(src, 8, 2, 2, rng), DataError);
}

TEST(MosaicTest, ComposesValidityMasks) {
  std::array<Sample, 4> src;
  for (auto& s : src) s = coordinate_sample(8, 8);
  Rng rng(4);
  for (int i = 0; i < 10; ++i) expect_consistent(mosaic_at(src, 8, rng.uniform_int(0, 8), rng.uniform_int(0, 8), rng));
}

TEST(MosaicTest, TilesAreRescaledToCoverTheirQuadrant) {
  // Solid sources survive any rescale, so each quadrant is one class.
  const std::array<Sample, 4> src = {solid(8, 8, 0.1, 1), solid(8, 8, 0.2, 2), solid(8, 8, 0.3, 3),
                                     solid(8, 8, 0.4, 4)};
  AugConfig cfg;
  cfg.mosaic_center_jitter = 0.5;
  Rng rng(19);
  for (int i = 0; i < 50; ++i) {
    const Sample m = mosaic(src, 16, rng, cfg);
    ASSERT_EQ(m.height(), 16);
    const auto h = histogram(m.label);
    ASSERT_EQ(h[1] + h[2] + h[3] + h[4], 256u);
  }
}

TEST(MosaicTest, FirstTileKeepsItsContent) {
  // A 2x2 marked block in a 16x16 source always reaches the output because
  // the tile is shrunk to its quadrant rather than cropped from the full source.
  std::vector<std::uint8_t> labels(256, 0);
  for (int y = 8; y < 10; ++y) {
    for (int x = 8; x < 10; ++x) labels[static_cast<std::size_t>(y * 16 + x)] = 5;
  }
  const Sample marked(InputImage(16, 16, std::vector<double>(4 * 256, 0.5)), LabelMap(16, 16, 9, labels));
  const std::array<Sample, 4> src = {marked, solid(16, 16, 0.2, 2), solid(16, 16, 0.3, 3), solid(16, 16, 0.4, 4)};
  AugConfig cfg;
  cfg.mosaic_center_jitter = 0.0;
  Rng rng(20);
  for (int i = 0; i < 50; ++i) ASSERT_GT(histogram(mosaic(src, 16, rng, cfg).label)[5], 0u);
}

TEST(FlipTest, Involution) {
  Rng rng(5);
  const Sample s = testing::random_sample(7, 9, 9, rng);
  EXPECT_EQ(hflip(hflip(s)), s);
  EXPECT_EQ(vflip(vflip(s)), s);
}

TEST(FlipTest, ZeroProbabilityIsIdentity) {
  Rng rng(6);
  const Sample s = testing::random_sample(5, 5, 9, rng);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(random_hflip(s, rng, 0.0), s);
    EXPECT_EQ(random_vflip(s, rng, 0.0), s);
    EXPECT_EQ(random_rot90(s, rng, 0.0), s);
  }
}

TEST(FlipTest, PixelDefinition) {
  Rng rng(7);
  const Sample s = testing::random_sample(4, 6, 9, rng);
  const Sample f = hflip(s);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 6; ++x) {
      EXPECT_EQ(f.label.at(y, x), s.label.at(y, 5 - x));
      EXPECT_EQ(f.image.at(2, y, x), s.image.at(2, y, 5 - x));
    }
  }
}

TEST(RotateTest, GroupLaws) {
  Rng rng(8);
  const Sample s = testing::random_sample(6, 6, 9, rng);
  EXPECT_EQ(rot90(rot90(rot90(rot90(s, 1), 1), 1), 1), s);
  EXPECT_EQ(rot90(s, 2), hflip(vflip(s)));
  EXPECT_EQ(rot90(rot90(s, 1), 3), s);
  EXPECT_EQ(histogram(rot90(s, 1).label), histogram(s.label));
}

TEST(RotateTest, ClockwiseQuarterTurn) {
  const Sample s = coordinate_sample(3, 3);
  const Sample r = rot90(s, 1);
  // Top row after a clockwise turn is the left column read bottom-up.
  EXPECT_DOUBLE_EQ(r.image.at(0, 0, 0) * 253.0, 6.0);
  EXPECT_DOUBLE_EQ(r.image.at(0, 0, 1) * 253.0, 3.0);
  EXPECT_DOUBLE_EQ(r.image.at(0, 0, 2) * 253.0, 0.0);
  EXPECT_EQ(r.label.at(1, 0), 7);
}

TEST(RotateTest, RequiresSquare) {
  Rng rng(9);
  const Sample s = testing::random_sample(4, 6, 9, rng);
  EXPECT_THROW(rot90(s, 1), UsageError);
  EXPECT_EQ(rot90(s, 4), s);
}

TEST(GeometryTest, MasksFollowPixels) {
  const Sample s = coordinate_sample(12, 12);
  expect_consistent(hflip(s));
  expect_consistent(vflip(s));
  for (int k = 1; k < 4; ++k) expect_consistent(rot90(s, k));
  Rng rng(10);
  for (int i = 0; i < 20; ++i) {
    const Sample r = random_resize_crop(s, rng, 1.0, 1.0, 8);
    expect_consistent(r);
  }
}

TEST(ResizeCropTest, UnitScaleFullCropIsIdentity) {
  Rng rng(11);
  const Sample s = testing::random_sample(10, 10, 9, rng);
  EXPECT_EQ(resize_crop(s, 1.0, 10, 0, 0), s);
  EXPECT_EQ(random_resize_crop(s, rng, 1.0, 1.0, 10), s);
}

TEST(ResizeCropTest, ShapeAndLabelInclusion) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Sample s = testing::random_sample(16, 16, 6, rng);
    std::set<int> present(s.label.labels().begin(), s.label.labels().end());
    const Sample r = random_resize_crop(s, rng, 0.75, 2.0, 12);
    ASSERT_EQ(r.height(), 12);
    ASSERT_EQ(r.width(), 12);
    for (auto v : r.label.labels()) ASSERT_TRUE(present.contains(v));
  }
}

TEST(ResizeCropTest, RejectsTooSmall) {
  Rng rng(13);
  const Sample s = testing::random_sample(10, 10, 9, rng);
  EXPECT_THROW(random_resize_crop(s, rng, 0.5, 0.5, 8), DataError);
}

TEST(ResizeCropTest, UpscaleInterpolatesLinearly) {
  // Horizontal ramp 0, 1/3, 2/3, 1: doubling keeps the interior on a line.
  std::vector<double> data(4 * 4);
  for (int c = 0; c < 4; ++c) {
    for (int x = 0; x < 4; ++x) data[static_cast<std::size_t>(c * 4 + x)] = x / 3.0;
  }
  const Sample s(InputImage(1, 4, data), LabelMap(1, 4, 9, {0, 1, 2, 3}));
  const Sample r = resize_crop(s, 2.0, 2, 0, 3);
  EXPECT_NEAR(r.image.at(0, 0, 0), (3.5 / 2.0 - 0.5) / 3.0, 1e-12);
  EXPECT_EQ(r.label.at(0, 0), 1);
  EXPECT_EQ(r.label.at(0, 1), 2);
}

TEST(JitterTest, ZeroStrengthIsIdentity) {
  Rng rng(14);
  const Sample s = testing::random_sample(5, 5, 9, rng);
  EXPECT_EQ(color_jitter(s, rng, {0.0, 0.0, 0.0}), s);
}

TEST(JitterTest, BrightnessClamps) {
  const Sample s = solid(2, 2, 0.9, 0);
  const Sample j = apply_color_jitter(s, {1.5, 1.0, 1.0});
  for (double v : j.image.data()) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_EQ(j.label, s.label);
}

TEST(JitterTest, SaturationLeavesNirAlone) {
  Rng rng(15);
  const Sample s = testing::random_sample(6, 6, 9, rng);
  const Sample j = apply_color_jitter(s, {1.0, 1.0, 1.7});
  const auto a = s.image.plane(3);
  const auto b = j.image.plane(3);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_NE(s.image, j.image);
}

TEST(JitterTest, ContrastKeepsRangeAndLabels) {
  Rng rng(16);
  for (int i = 0; i < 20; ++i) {
    const Sample s = testing::random_sample(6, 6, 9, rng);
    const Sample j = color_jitter(s, rng, {0.5, 0.9, 0.9});
    for (double v : j.image.data()) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
    ASSERT_EQ(j.label, s.label);
  }
}

TEST(PipelineTest, MinimalPipelineIsResizeCrop) {
  AugConfig cfg;
  cfg.crop_size = 8;
  cfg.hflip_prob = cfg.vflip_prob = cfg.rotate_prob = cfg.mosaic_prob = 0.0;
  cfg.brightness = cfg.contrast = cfg.saturation = 0.0;
  cfg.scale_lo = 1.0;
  cfg.scale_hi = 1.5;
  Rng rng(17);
  const Sample s = testing::random_sample(12, 12, 9, rng);
  Rng a(5), b(5);
  const Sample out = apply_pipeline(s, {}, cfg, a);
  EXPECT_EQ(out, random_resize_crop(s, b, 1.0, 1.5, 8));
}

TEST(PipelineTest, DeterministicAndShapePreserving) {
  AugConfig cfg;
  cfg.crop_size = 10;
  cfg.scale_lo = 0.9;
  cfg.scale_hi = 1.3;
  Rng rng(18);
  std::vector<Sample> pool;
  for (int i = 0; i < 5; ++i) pool.push_back(testing::random_sample(12, 12, 9, rng));
  for (int trial = 0; trial < 30; ++trial) {
    Rng a(trial), b(trial);
    const Sample x = apply_pipeline(pool[0], pool, cfg, a);
    const Sample y = apply_pipeline(pool[0], pool, cfg, b);
    ASSERT_EQ(x, y);
    ASSERT_EQ(x.height(), 10);
    ASSERT_EQ(x.image.height(), x.label.height());
  }
}

TEST(PipelineTest, ForcedRareClassUsuallySurvives) {
  testing::TempDir dir("aug");
  const PipelineConfig desk = PipelineConfig::desk_defaults();
  const SampleManifest manifest = generate_synthetic_dataset(desk.synth, dir.path(), 21);
  const std::vector<Sample> samples = load_samples(manifest);
  const RareClassSampler sampler(manifest, desk.rcs);
  Rng rng(22);
  for (int c = 1; c < 9; ++c) {
    int hits = 0;
    for (int run = 0; run < 1000; ++run) {
      const Sample& first = samples[sampler.draw_for_class(c, rng)];
      const Sample out = apply_pipeline(first, samples, desk.augment, rng);
      hits += out.label.class_counts()[static_cast<std::size_t>(c)] > 0;
    }
    EXPECT_GE(hits, 900) << "class " << c;
  }
}

}  // namespace
}  // namespace imbalseg
