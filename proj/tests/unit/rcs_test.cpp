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
#include "imbalseg/rcs.hpp"

#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "imbalseg/error.hpp"
#include "test_util.hpp"

namespace imbalseg {
namespace {

// Direct softmax, no max subtraction; fine for the moderate T used here.
std::vector<double> softmax_oracle(const std::vector<double>& f, double t, const std::vector<bool>& included) {
  std::vector<double> e(f.size(), 0.0);
  double z = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) {
    if (!included[c]) continue;
    e[c] = std::exp((1.0 - f[c]) / t);
    z += e[c];
  }
  for (double& v : e) v /= z;
  return e;
}

std::vector<double> random_frequencies(Rng& rng, int n) {
  std::vector<double> f(static_cast<std::size_t>(n));
  for (double& v : f) v = rng.uniform(0.001, 1.0);
  const double s = std::accumulate(f.begin(), f.end(), 0.0);
  for (double& v : f) v /= s;
  return f;
}

TEST(RcsDistributionTest, ThreeClassExample) {
  const std::vector<double> f = {0.5, 0.3, 0.2};
  const auto d = rcs_distribution(f, 1.0, true);
  const double z = std::exp(0.5) + std::exp(0.7) + std::exp(0.8);
  EXPECT_NEAR(d.probs[0], std::exp(0.5) / z, 1e-15);
  EXPECT_NEAR(d.probs[0], 0.2800, 5e-5);
  EXPECT_NEAR(d.probs[1], 0.3420, 5e-5);
  EXPECT_NEAR(d.probs[2], 0.3780, 5e-5);
  const auto oracle = softmax_oracle(f, 1.0, {true, true, true});
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(d.probs[static_cast<std::size_t>(c)], oracle[static_cast<std::size_t>(c)], 1e-12);
}

TEST(RcsDistributionTest, UniformFrequenciesGiveUniformProbabilities) {
  const std::vector<double> f(5, 0.2);
  for (double t : {1e-4, 0.01, 1.0, 1e6}) {
    const auto d = rcs_distribution(f, t, true);
    for (double p : d.probs) EXPECT_NEAR(p, 0.2, 1e-12);
  }
}

TEST(RcsDistributionTest, HighTemperatureIsUniform) {
  const std::vector<double> f = {0.9, 0.06, 0.03, 0.01};
  const auto d = rcs_distribution(f, 1e6, true);
  for (double p : d.probs) EXPECT_NEAR(p, 0.25, 1e-6);
}

TEST(RcsDistributionTest, BackgroundExcludedByDefault) {
  const std::vector<double> f = {0.9, 0.06, 0.04};
  const auto d = rcs_distribution(f, 1.0, false);
  EXPECT_EQ(d.probs[0], 0.0);
  const auto oracle = softmax_oracle(f, 1.0, {false, true, true});
  EXPECT_NEAR(d.probs[1], oracle[1], 1e-12);
  const auto bg2 = rcs_distribution(f, 1.0, false, 2);
  EXPECT_EQ(bg2.probs[2], 0.0);
  EXPECT_GT(bg2.probs[0], 0.0);
}

TEST(RcsDistributionTest, RejectsBadInput) {
  const std::vector<double> f = {0.5, 0.5};
  EXPECT_THROW(rcs_distribution(f, 0.0, true), UsageError);
  EXPECT_THROW(rcs_distribution(f, -1.0, true), UsageError);
  const std::vector<double> bad = {1.5, -0.5};
  EXPECT_THROW(rcs_distribution(bad, 1.0, true), UsageError);
}

TEST(RcsDistributionTest, SumsToOneAcrossTemperatures) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = random_frequencies(rng, 9);
    for (double t : {1e-4, 1e-3, 0.01, 1.0, 100.0, 1e6}) {
      const auto d = rcs_distribution(f, t, trial % 2 == 0);
      EXPECT_NEAR(std::accumulate(d.probs.begin(), d.probs.end(), 0.0), 1.0, 1e-12);
    }
  }
}

TEST(RcsDistributionTest, Monotone) {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = random_frequencies(rng, 9);
    const auto d = rcs_distribution(f, rng.uniform(0.005, 2.0), true);
    for (std::size_t a = 0; a < f.size(); ++a) {
      for (std::size_t b = 0; b < f.size(); ++b) {
        if (f[a] < f[b]) {
          ASSERT_GE(d.probs[a], d.probs[b]);
        }
      }
    }
  }
}

TEST(RcsDistributionTest, LowTemperatureConcentratesOnRarest) {
  const std::vector<double> f = {0.80, 0.10, 0.05, 0.03, 0.02};
  const auto d = rcs_distribution(f, 1e-3, true);
  EXPECT_GT(d.probs[4], 0.999);
}

TEST(SampleClassTest, DegenerateDistribution) {
  Rng rng(1);
  const ClassDistribution d{{1.0, 0.0, 0.0}, 1.0};
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_class(d, rng), 0);
  const ClassDistribution last{{0.0, 0.0, 1.0}, 1.0};
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_class(last, rng), 2);
}

TEST(SampleClassTest, FairCoin) {
  Rng rng(2);
  const ClassDistribution d{{0.5, 0.5}, 1.0};
  int ones = 0;
  for (int i = 0; i < 100000; ++i) ones += sample_class(d, rng);
  EXPECT_NEAR(ones / 100000.0, 0.5, 0.01);
}

TEST(SampleClassTest, Reproducible) {
  const ClassDistribution d{{0.2, 0.3, 0.5}, 1.0};
  Rng a(99), b(99);
  for (int i = 0; i < 500; ++i) ASSERT_EQ(sample_class(d, a), sample_class(d, b));
}

TEST(SampleClassTest, ChiSquareAgainstDistribution) {
  Rng rng(31);
  const std::vector<double> f = {0.6, 0.2, 0.1, 0.06, 0.04};
  const auto d = rcs_distribution(f, 0.2, true);
  constexpr int kDraws = 100000;
  std::vector<int> hits(f.size(), 0);
  for (int i = 0; i < kDraws; ++i) ++hits[static_cast<std::size_t>(sample_class(d, rng))];
  double stat = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) {
    const double expected = kDraws * d.probs[c];
    stat += (hits[c] - expected) * (hits[c] - expected) / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(f.size() - 1));
  EXPECT_LT(stat, boost::math::quantile(dist, 0.999));
}

SampleManifest counts_manifest(const std::vector<std::vector<std::uint64_t>>& counts) {
  SampleManifest m{{}, ClassSet::numbered(static_cast<int>(counts.front().size()))};
  for (std::size_t i = 0; i < counts.size(); ++i) m.entries.push_back({"s" + std::to_string(i), {}, {}, {}, counts[i]});
  return m;
}

TEST(ClassIndexTest, Threshold) {
  const auto m = counts_manifest({{0, 1500}, {0, 999}, {0, 1000}});
  const auto idx = build_class_index(m, 1000);
  EXPECT_EQ(idx.ids[1], (std::vector<std::string>{"s0", "s2"}));
  EXPECT_TRUE(idx.empty(0));
}

TEST(ClassIndexTest, MatchesLinearScan) {
  Rng rng(6);
  std::vector<std::vector<std::uint64_t>> counts(40, std::vector<std::uint64_t>(6));
  for (auto& row : counts) {
    for (auto& v : row) v = rng.bernoulli(0.5) ? rng.uniform_index(300) : 0;
  }
  const auto m = counts_manifest(counts);
  for (std::uint64_t min_pixels : {1ULL, 50ULL, 150ULL}) {
    const auto idx = build_class_index(m, min_pixels);
    for (std::size_t c = 0; c < 6; ++c) {
      std::vector<std::string> expected;
      for (const auto& e : m.entries) {
        if (e.class_pixel_counts[c] >= min_pixels) expected.push_back(e.id);
      }
      EXPECT_EQ(idx.ids[c], expected);
    }
  }
}

TEST(SampleImageTest, SingletonPairAndEmpty) {
  const auto m = counts_manifest({{5, 5, 0}, {5, 5, 0}});
  const auto idx = build_class_index(m, 1);
  Rng rng(3);
  int first = 0;
  for (int i = 0; i < 20000; ++i) first += sample_image_for_class(idx, 1, rng) == "s0";
  EXPECT_NEAR(first / 20000.0, 0.5, 0.02);
  const auto single = build_class_index(counts_manifest({{5, 0, 0}, {5, 3, 0}}), 1);
  EXPECT_EQ(sample_image_for_class(single, 1, rng), "s1");
  try {
    sample_image_for_class(idx, 2, rng);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("class 2"), std::string::npos) << e.what();
  }
}

TEST(RareClassSamplerTest, SkipsClassesWithoutImages) {
  // Class 2 is rarest but never reaches min_pixels, so only class 1 can be drawn.
  const auto m = counts_manifest({{900, 100, 0}, {990, 0, 10}, {1000, 0, 0}});
  RcsConfig cfg;
  cfg.min_pixels = 50;
  const RareClassSampler sampler(m, cfg);
  EXPECT_GT(sampler.distribution().probs[2], sampler.distribution().probs[1]);
  EXPECT_FALSE(sampler.uniform_fallback());
  Rng rng(5);
  for (int i = 0; i < 200; ++i) ASSERT_EQ(sampler.draw(rng), 0u);
}

TEST(RareClassSamplerTest, FallsBackToUniform) {
  const auto m = counts_manifest({{900, 1, 0}, {990, 0, 1}, {1000, 0, 0}});
  RcsConfig cfg;
  cfg.min_pixels = 50;
  const RareClassSampler sampler(m, cfg);
  EXPECT_TRUE(sampler.uniform_fallback());
  Rng rng(5);
  std::vector<int> hits(3, 0);
  for (int i = 0; i < 3000; ++i) ++hits[sampler.draw(rng)];
  for (int h : hits) EXPECT_GT(h, 800);
}

}  // namespace
}  // namespace imbalseg
