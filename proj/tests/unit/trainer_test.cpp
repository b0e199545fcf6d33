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
#include "imbalseg/trainer.hpp"

#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "imbalseg/error.hpp"
#include "test_util.hpp"

namespace imbalseg {
namespace {

// Direct sum over reflected neighbours, written without the padded buffer.
Tensor3 naive_forward(const ModelParams& m, const InputImage& img) {
  const int k = m.kernel_size(), r = k / 2, h = img.height(), w = img.width();
  const auto refl = [](int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return i;
  };
  Tensor3 out(m.num_classes(), h, w);
  for (int c = 0; c < m.num_classes(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = m.bias()[c];
        for (int ch = 0; ch < 4; ++ch) {
          for (int dy = 0; dy < k; ++dy) {
            for (int dx = 0; dx < k; ++dx) {
              s += m.kernel()[m.kernel_index(c, ch, dy, dx)] * img.at(ch, refl(y + dy - r, h), refl(x + dx - r, w));
            }
          }
        }
        out.at(c, y, x) = s;
      }
    }
  }
  return out;
}

AugConfig no_augmentation(int crop) {
  AugConfig a;
  a.crop_size = crop;
  a.hflip_prob = a.vflip_prob = a.rotate_prob = 0.0;
  a.scale_lo = a.scale_hi = 1.0;
  a.brightness = a.contrast = a.saturation = 0.0;
  a.mosaic_prob = 0.0;
  return a;
}

// Class 1 wherever the red channel is bright.
std::vector<Sample> separable_samples(int n, Rng& rng) {
  std::vector<Sample> out;
  for (int i = 0; i < n; ++i) {
    const int h = 12, w = 12;
    std::vector<double> px(4 * 144);
    std::vector<std::uint8_t> lab(144);
    for (int p = 0; p < 144; ++p) {
      const bool fg = rng.uniform() < 0.3;
      lab[p] = fg ? 1 : 0;
      px[p] = fg ? rng.uniform(0.7, 1.0) : rng.uniform(0.0, 0.3);
      for (int ch = 1; ch < 4; ++ch) px[ch * 144 + p] = rng.uniform();
    }
    out.emplace_back(InputImage(h, w, px), LabelMap(h, w, 2, lab));
  }
  return out;
}

SampleManifest manifest_for(const std::vector<Sample>& samples, const ClassSet& classes) {
  SampleManifest m;
  m.class_set = classes;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SampleEntry e;
    e.id = "s" + std::to_string(i);
    e.class_pixel_counts = samples[i].label.class_counts();
    m.entries.push_back(e);
  }
  return m;
}

TEST(PolyLrTest, KnownValues) {
  TrainConfig c;
  c.lr0 = 0.1;
  c.max_iter = 1000;
  c.warmup_iters = 0;
  EXPECT_NEAR(poly_lr(100, c), 0.1 * std::pow(0.9, 0.9), 1e-15);
  EXPECT_NEAR(poly_lr(100, c), 0.09095, 1e-4);
  EXPECT_DOUBLE_EQ(poly_lr(0, c), 0.1);
  EXPECT_EQ(poly_lr(1000, c), 0.0);
  EXPECT_THROW(poly_lr(-1, c), UsageError);
  EXPECT_THROW(poly_lr(1001, c), UsageError);
}

TEST(PolyLrTest, WarmupThenDecay) {
  TrainConfig c;
  c.lr0 = 2.0;
  c.max_iter = 200;
  EXPECT_EQ(c.effective_warmup(), 10);
  EXPECT_DOUBLE_EQ(poly_lr(0, c), 0.2);
  EXPECT_DOUBLE_EQ(poly_lr(9, c), 2.0);
  for (int i = 10; i < 200; ++i) EXPECT_LE(poly_lr(i + 1, c), poly_lr(i, c));
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  c.max_iter = 10;
  c.warmup_iters = 10;
  EXPECT_THROW(c.validate(), UsageError);
  c.warmup_iters = 2;
  EXPECT_NO_THROW(c.validate());
  c.kernel_size = 4;
  EXPECT_THROW(c.validate(), UsageError);
  const TrainConfig p = TrainConfig::large_scale();
  EXPECT_EQ(p.batch_size, 16);
  EXPECT_EQ(p.max_iter, 160000);
  EXPECT_DOUBLE_EQ(p.lr0, 6e-6);
}

TEST(ForwardTest, MatchesNaiveConvolution) {
  Rng rng(11);
  for (const auto& [h, w, k] : {std::tuple{7, 9, 5}, {3, 2, 5}, {1, 6, 3}, {10, 10, 1}, {4, 4, 3}}) {
    const ModelParams m = testing::random_model(3, k, rng);
    const InputImage img = testing::random_image(h, w, rng);
    EXPECT_LT(testing::max_abs_diff(forward(m, img).data, naive_forward(m, img).data), 1e-12) << h << "x" << w;
  }
}

TEST(ForwardTest, ZeroModelGivesUniformPrediction) {
  Rng rng(12);
  const ProbMap p = predict(ModelParams(9, 5), testing::random_image(6, 5, rng));
  for (double v : p.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 9.0);
}

TEST(ParamGradientTest, MatchesFiniteDifferences) {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const ModelParams m = testing::random_model(3, 3, rng, 0.3);
    const InputImage img = testing::random_image(5, 4, rng);
    const LabelMap labels = testing::random_labels(5, 4, 3, rng, 0.2);
    const ClassWeights wts{{0.6, 1.1, 1.3}, false};
    std::vector<double> flat = m.kernel();
    flat.insert(flat.end(), m.bias().begin(), m.bias().end());
    const std::size_t nk = m.kernel().size();
    const auto unflatten = [&](const std::vector<double>& x) {
      return ModelParams(3, 3, std::vector<double>(x.begin(), x.begin() + static_cast<long>(nk)),
                         std::vector<double>(x.begin() + static_cast<long>(nk), x.end()));
    };
    const auto f = [&](const std::vector<double>& x) { return weighted_ce_loss(forward(unflatten(x), img), labels, wts); };
    const ModelParams g = param_gradient(m, img, loss_gradient(forward(m, img), labels, wts));
    std::vector<double> analytic = g.kernel();
    analytic.insert(analytic.end(), g.bias().begin(), g.bias().end());
    EXPECT_LT(testing::relative_error(analytic, testing::numeric_gradient(f, flat)), 1e-6);
  }
}

TEST(TrainTest, FirstLossIsLogC) {
  Rng rng(14);
  const auto samples = separable_samples(4, rng);
  const auto manifest = manifest_for(samples, ClassSet::numbered(2));
  TrainConfig c;
  c.max_iter = 3;
  c.warmup_iters = 0;
  RcsConfig rcs;
  rcs.enabled = false;
  const auto r = train(c, manifest, samples, rcs, no_augmentation(12), AcwConfig{false});
  ASSERT_EQ(r.log.rows.size(), 3u);
  EXPECT_NEAR(r.log.rows[0].loss, std::log(2.0), 1e-12);
}

TEST(TrainTest, LearnsSeparableProblem) {
  Rng rng(15);
  const auto samples = separable_samples(16, rng);
  const auto manifest = manifest_for(samples, ClassSet::numbered(2));
  TrainConfig c;
  c.max_iter = 300;
  c.lr0 = 1.0;
  c.seed = 3;
  RcsConfig rcs;
  rcs.min_pixels = 1;
  const auto r = train(c, manifest, samples, rcs, no_augmentation(12), AcwConfig{});
  std::size_t right = 0, total = 0;
  for (const Sample& s : samples) {
    const LabelMap pred = argmax_map(predict(r.params, s.image));
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 12; ++x) right += pred.at(y, x) == s.label.at(y, x);
    }
    total += 144;
  }
  EXPECT_GT(static_cast<double>(right) / static_cast<double>(total), 0.95);
  EXPECT_LT(r.log.rows.back().loss, r.log.rows.front().loss);
}

TEST(TrainTest, Deterministic) {
  Rng rng(16);
  std::vector<Sample> samples;
  for (int i = 0; i < 6; ++i) samples.push_back(testing::random_sample(24, 24, 4, rng));
  const auto manifest = manifest_for(samples, ClassSet::numbered(4));
  TrainConfig c;
  c.max_iter = 20;
  c.seed = 99;
  RcsConfig rcs;
  rcs.min_pixels = 1;
  AugConfig aug;
  aug.crop_size = 12;
  const auto a = train(c, manifest, samples, rcs, aug, AcwConfig{});
  const auto b = train(c, manifest, samples, rcs, aug, AcwConfig{});
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.log, b.log);
  c.seed = 100;
  EXPECT_NE(train(c, manifest, samples, rcs, aug, AcwConfig{}).params, a.params);
}

TEST(TrainTest, AcwWeightsAreLogged) {
  Rng rng(17);
  const auto samples = separable_samples(4, rng);
  const auto manifest = manifest_for(samples, ClassSet::numbered(2));
  TrainConfig c;
  c.max_iter = 5;
  RcsConfig rcs;
  rcs.enabled = false;
  const auto r = train(c, manifest, samples, rcs, no_augmentation(12), AcwConfig{});
  EXPECT_EQ(r.log.rows[0].weights, (std::vector<double>{1.0, 1.0}));
  for (std::size_t i = 1; i < r.log.rows.size(); ++i) {
    const auto& row = r.log.rows[i];
    ASSERT_EQ(row.weights.size(), 2u);
    EXPECT_NEAR(row.weights[0] + row.weights[1], 2.0, 1e-12);
    EXPECT_LT(row.weights[0], row.weights[1]);
  }
  const auto plain = train(c, manifest, samples, rcs, no_augmentation(12), AcwConfig{false});
  for (const auto& row : plain.log.rows) EXPECT_EQ(row.weights, (std::vector<double>{1.0, 1.0}));
}

TEST(CheckpointTest, RoundTrip) {
  Rng rng(18);
  const ModelParams m = testing::random_model(9, 5, rng);
  const auto bytes = encode_checkpoint(m);
  EXPECT_EQ(bytes.size(), 16u + 8u * (9u * 4u * 25u + 9u));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SEGW");
  EXPECT_EQ(decode_checkpoint(bytes), m);
  testing::TempDir dir("segw");
  write_checkpoint(m, dir / "m.segw");
  EXPECT_EQ(read_checkpoint(dir / "m.segw"), m);
}

TEST(CheckpointTest, RejectsCorruptInput) {
  Rng rng(19);
  auto bytes = encode_checkpoint(testing::random_model(2, 3, rng));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), DataError);
  bad = bytes;
  bad[4] = 2;
  EXPECT_THROW(decode_checkpoint(bad), DataError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(decode_checkpoint(bad), DataError);
  EXPECT_THROW(decode_checkpoint(std::vector<std::uint8_t>(8)), DataError);
}

TEST(TrainLogTest, CsvLayout) {
  TrainLog log;
  log.rows.push_back({0, 0.5, 0.25, {1.5, 0.5}});
  testing::TempDir dir("log");
  write_train_log(log, dir / "log.csv");
  const auto bytes = testing::read_bytes(dir / "log.csv");
  EXPECT_EQ(std::string(bytes.begin(), bytes.end()), "iter,lr,loss,w_0,w_1\n0,0.5,0.25,1.5,0.5\n");
}

}  // namespace
}  // namespace imbalseg
