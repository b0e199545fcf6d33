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
#include "test_util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iterator>

#include <unistd.h>

namespace imbalseg::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("imbalseg_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

InputImage random_image(int h, int w, Rng& rng) {
  std::vector<double> data(static_cast<std::size_t>(kInputChannels * h * w));
  for (double& v : data) v = rng.uniform();
  return InputImage(h, w, std::move(data));
}

LabelMap random_labels(int h, int w, int num_classes, Rng& rng, double invalid_share) {
  const auto n = static_cast<std::size_t>(h * w);
  std::vector<std::uint8_t> labels(n), valid;
  for (auto& l : labels) l = static_cast<std::uint8_t>(rng.uniform_index(static_cast<std::uint64_t>(num_classes)));
  if (invalid_share > 0.0) {
    valid.resize(n);
    for (auto& v : valid) v = rng.bernoulli(invalid_share) ? 0 : 1;
  }
  return LabelMap(h, w, num_classes, std::move(labels), std::move(valid));
}

ProbMap random_probs(int c, int h, int w, Rng& rng) {
  Tensor3 t(c, h, w);
  for (double& v : t.data) v = rng.uniform(0.01, 1.0);
  return normalize(ProbMap(std::move(t)));
}

Tensor3 random_tensor(int c, int h, int w, Rng& rng, double lo, double hi) {
  Tensor3 t(c, h, w);
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

ModelParams random_model(int num_classes, int kernel_size, Rng& rng, double scale) {
  ModelParams m(num_classes, kernel_size);
  for (double& v : m.kernel()) v = rng.uniform(-scale, scale);
  for (double& v : m.bias()) v = rng.uniform(-scale, scale);
  return m;
}

Sample random_sample(int h, int w, int num_classes, Rng& rng) {
  return Sample(random_image(h, w, rng), random_labels(h, w, num_classes, rng));
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? m : INFINITY;
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

}  // namespace imbalseg::testing
