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
#ifndef IMBALSEG_TESTS_TEST_UTIL_HPP_
#define IMBALSEG_TESTS_TEST_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imbalseg/augment.hpp"
#include "imbalseg/rng.hpp"
#include "imbalseg/trainer.hpp"
#include "imbalseg/types.hpp"

namespace imbalseg::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

InputImage random_image(int h, int w, Rng& rng);
LabelMap random_labels(int h, int w, int num_classes, Rng& rng, double invalid_share = 0.0);
// Random positive probabilities, normalized per pixel.
ProbMap random_probs(int c, int h, int w, Rng& rng);
Tensor3 random_tensor(int c, int h, int w, Rng& rng, double lo = -1.0, double hi = 1.0);
ModelParams random_model(int num_classes, int kernel_size, Rng& rng, double scale = 0.5);
Sample random_sample(int h, int w, int num_classes, Rng& rng);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

// ||a - b|| / max(||a||, ||b||), 0 when both are zero.
double relative_error(const std::vector<double>& a, const std::vector<double>& b);

// Central differences of f at x, one coordinate at a time.
template <typename F>
std::vector<double> numeric_gradient(F&& f, std::vector<double> x, double step = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = f(x);
    x[i] = orig - step;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace imbalseg::testing

#endif  // IMBALSEG_TESTS_TEST_UTIL_HPP_
