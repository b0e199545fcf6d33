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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

#include <fmt/format.h>

#include "imbalseg/error.hpp"
#include "imbalseg/rng.hpp"

namespace imbalseg {
namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Reflect-padded copy of the image: 4 planes of (H + 2r) x (W + 2r).
struct Padded {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  const double* row(int ch, int y) const {
    return data.data() + (static_cast<std::size_t>(ch) * static_cast<std::size_t>(height) + static_cast<std::size_t>(y)) *
                             static_cast<std::size_t>(width);
  }
};

Padded pad(const InputImage& image, int r) {
  Padded p{image.height() + 2 * r, image.width() + 2 * r, {}};
  p.data.resize(4 * static_cast<std::size_t>(p.height) * static_cast<std::size_t>(p.width));
  std::size_t i = 0;
  for (int ch = 0; ch < 4; ++ch) {
    for (int y = 0; y < p.height; ++y) {
      const int sy = reflect(y - r, image.height());
      for (int x = 0; x < p.width; ++x) p.data[i++] = image.at(ch, sy, reflect(x - r, image.width()));
    }
  }
  return p;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t off, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[off + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

}  // namespace

ModelParams::ModelParams(int num_classes, int kernel_size)
    : ModelParams(num_classes, kernel_size,
                  std::vector<double>(static_cast<std::size_t>(num_classes) * kInputChannels *
                                          static_cast<std::size_t>(kernel_size) * static_cast<std::size_t>(kernel_size),
                                      0.0),
                  std::vector<double>(static_cast<std::size_t>(num_classes), 0.0)) {}

ModelParams::ModelParams(int num_classes, int kernel_size, std::vector<double> kernel, std::vector<double> bias)
    : num_classes_(num_classes), kernel_size_(kernel_size), kernel_(std::move(kernel)), bias_(std::move(bias)) {
  if (num_classes_ < 2 || num_classes_ > kMaxClasses) throw UsageError("model class count out of range");
  if (kernel_size_ < 1 || kernel_size_ % 2 == 0) {
    throw UsageError(fmt::format("kernel size must be odd and positive, got {}", kernel_size_));
  }
  if (kernel_.size() != static_cast<std::size_t>(num_classes_) * kInputChannels *
                            static_cast<std::size_t>(kernel_size_) * static_cast<std::size_t>(kernel_size_) ||
      bias_.size() != static_cast<std::size_t>(num_classes_)) {
    throw UsageError("model parameter buffers do not match C and k");
  }
  for (double v : kernel_) {
    if (!std::isfinite(v)) throw NumericError("non-finite kernel weight");
  }
  for (double v : bias_) {
    if (!std::isfinite(v)) throw NumericError("non-finite bias");
  }
}

TrainConfig TrainConfig::large_scale() {
  TrainConfig c;
  c.max_iter = 160000;
  c.batch_size = 16;
  c.lr0 = 6e-6;
  c.power = 0.9;
  c.weight_decay = 0.01;
  return c;
}

void TrainConfig::validate() const {
  if (max_iter < 1) throw UsageError("train.max_iter must be >= 1");
  if (batch_size < 1) throw UsageError("train.batch_size must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw UsageError("train.lr0 must be > 0");
  if (!(power > 0.0) || !std::isfinite(power)) throw UsageError("train.power must be > 0");
  if (effective_warmup() >= max_iter) throw UsageError("train.warmup_iters must be < max_iter");
  if (!(weight_decay >= 0.0)) throw UsageError("train.weight_decay must be >= 0");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw UsageError("train.kernel_size must be odd and positive");
}

double poly_lr(int iter, const TrainConfig& config) {
  if (iter < 0 || iter > config.max_iter) {
    throw UsageError(fmt::format("iteration {} outside [0, {}]", iter, config.max_iter));
  }
  const int warmup = config.effective_warmup();
  if (iter < warmup) return config.lr0 * static_cast<double>(iter + 1) / static_cast<double>(warmup);
  return config.lr0 * std::pow(1.0 - static_cast<double>(iter) / static_cast<double>(config.max_iter), config.power);
}

Tensor3 forward(const ModelParams& params, const InputImage& image) {
  const int k = params.kernel_size();
  const int r = k / 2;
  const int h = image.height();
  const int w = image.width();
  const Padded p = pad(image, r);
  Tensor3 out(params.num_classes(), h, w);
  for (int c = 0; c < params.num_classes(); ++c) {
    double* plane = out.data.data() + static_cast<std::size_t>(c) * out.plane_size();
    std::fill(plane, plane + out.plane_size(), params.bias()[static_cast<std::size_t>(c)]);
    for (int ch = 0; ch < 4; ++ch) {
      for (int dy = 0; dy < k; ++dy) {
        for (int dx = 0; dx < k; ++dx) {
          const double wgt = params.kernel()[params.kernel_index(c, ch, dy, dx)];
          if (wgt == 0.0) continue;
          for (int y = 0; y < h; ++y) {
            const double* src = p.row(ch, y + dy) + dx;
            double* dst = plane + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
            for (int x = 0; x < w; ++x) dst[x] += wgt * src[x];
          }
        }
      }
    }
  }
  return out;
}

ModelParams param_gradient(const ModelParams& params, const InputImage& image, const Tensor3& grad_logits) {
  if (grad_logits.channels != params.num_classes() || grad_logits.height != image.height() ||
      grad_logits.width != image.width()) {
    throw UsageError("logit gradient does not match model and image");
  }
  const int k = params.kernel_size();
  const int r = k / 2;
  const int h = image.height();
  const int w = image.width();
  const Padded p = pad(image, r);
  ModelParams g(params.num_classes(), k);
  for (int c = 0; c < params.num_classes(); ++c) {
    const double* gplane = grad_logits.data.data() + static_cast<std::size_t>(c) * grad_logits.plane_size();
    double bsum = 0.0;
    for (std::size_t i = 0; i < grad_logits.plane_size(); ++i) bsum += gplane[i];
    g.bias()[static_cast<std::size_t>(c)] = bsum;
    for (int ch = 0; ch < 4; ++ch) {
      for (int dy = 0; dy < k; ++dy) {
        for (int dx = 0; dx < k; ++dx) {
          double acc = 0.0;
          for (int y = 0; y < h; ++y) {
            const double* src = p.row(ch, y + dy) + dx;
            const double* gr = gplane + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
            for (int x = 0; x < w; ++x) acc += gr[x] * src[x];
          }
          g.kernel()[g.kernel_index(c, ch, dy, dx)] = acc;
        }
      }
    }
  }
  return g;
}

ProbMap predict(const ModelParams& params, const InputImage& image) {
  Tensor3 t = forward(params, image);
  const std::size_t plane = t.plane_size();
  const auto nc = static_cast<std::size_t>(t.channels);
  for (std::size_t p = 0; p < plane; ++p) {
    double mx = t.data[p];
    for (std::size_t c = 1; c < nc; ++c) mx = std::max(mx, t.data[c * plane + p]);
    double z = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      double& v = t.data[c * plane + p];
      v = std::exp(v - mx);
      z += v;
    }
    for (std::size_t c = 0; c < nc; ++c) t.data[c * plane + p] /= z;
  }
  return ProbMap(std::move(t), true);
}

std::vector<Sample> load_samples(const SampleManifest& manifest) {
  std::vector<Sample> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    out.emplace_back(read_input_image(e), read_label_map(e.label, manifest.class_set.num_classes()));
  }
  return out;
}

TrainResult train(const TrainConfig& config, const SampleManifest& manifest, std::span<const Sample> samples,
                  const RcsConfig& rcs, const AugConfig& aug, const AcwConfig& acw) {
  config.validate();
  aug.validate();
  acw.validate();
  if (manifest.entries.empty()) throw DataError("training manifest is empty");
  if (samples.size() != manifest.entries.size()) throw UsageError("samples do not match manifest entries");
  const int num_classes = manifest.class_set.num_classes();

  std::optional<RareClassSampler> sampler;
  if (rcs.enabled) sampler.emplace(manifest, rcs);

  Rng rng(derive_seed(config.seed, "train.batches"));
  TrainResult result{ModelParams(num_classes, config.kernel_size), {}};
  ModelParams& params = result.params;
  RunningClassCounts running(num_classes);

  std::vector<Sample> batch;
  std::vector<LabelMap> batch_labels;
  std::vector<Tensor3> logits;
  std::vector<Tensor3> grads;
  for (int it = 0; it < config.max_iter; ++it) {
    const double lr = poly_lr(it, config);
    batch.clear();
    for (int b = 0; b < config.batch_size; ++b) {
      const std::size_t idx = sampler ? sampler->draw(rng) : rng.uniform_index(samples.size());
      batch.push_back(apply_pipeline(samples[idx], samples, aug, rng));
    }
    batch_labels.clear();
    logits.clear();
    for (const auto& s : batch) {
      batch_labels.push_back(s.label);
      logits.push_back(forward(params, s.image));
    }

    // Weights come from the pixels seen before this batch.
    const ClassWeights weights =
        acw.enabled ? class_weights(running, acw.epsilon, acw.iota) : ClassWeights::uniform(num_classes);
    const double loss = batch_loss_and_gradient(logits, batch_labels, weights, &grads);
    if (!std::isfinite(loss)) throw NumericError(fmt::format("loss became non-finite at iteration {}", it));
    running = update_running_counts(std::move(running), batch_labels);

    ModelParams total(num_classes, config.kernel_size);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const ModelParams g = param_gradient(params, batch[i].image, grads[i]);
      for (std::size_t j = 0; j < g.kernel().size(); ++j) total.kernel()[j] += g.kernel()[j];
      for (std::size_t j = 0; j < g.bias().size(); ++j) total.bias()[j] += g.bias()[j];
    }
    const double decay = 1.0 - lr * config.weight_decay;
    for (std::size_t j = 0; j < params.kernel().size(); ++j) {
      params.kernel()[j] = params.kernel()[j] * decay - lr * total.kernel()[j];
    }
    for (std::size_t j = 0; j < params.bias().size(); ++j) params.bias()[j] -= lr * total.bias()[j];

    result.log.rows.push_back({it, lr, loss, weights.weights});
  }
  return result;
}

TrainResult train(const TrainConfig& config, const SampleManifest& manifest, const RcsConfig& rcs,
                  const AugConfig& aug, const AcwConfig& acw) {
  const std::vector<Sample> samples = load_samples(manifest);
  return train(config, manifest, samples, rcs, aug, acw);
}

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 8 * (params.kernel().size() + params.bias().size()));
  out.insert(out.end(), {'S', 'E', 'G', 'W'});
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(params.num_classes()));
  put_u32(out, static_cast<std::uint32_t>(params.kernel_size()));
  for (double v : params.kernel()) put_f64(out, v);
  for (double v : params.bias()) put_f64(out, v);
  return out;
}

ModelParams decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "SEGW", 4) != 0) throw DataError("bad SEGW magic");
  const auto version = get_le(bytes, 4, 4);
  if (version != 1) throw DataError(fmt::format("unsupported SEGW version {}", version));
  const auto c = get_le(bytes, 8, 4);
  const auto k = get_le(bytes, 12, 4);
  if (c < 2 || c > kMaxClasses || k < 1 || k % 2 == 0 || k > 255) throw DataError("SEGW header has invalid C or k");
  const std::size_t nk = c * kInputChannels * k * k;
  const std::size_t expected = 16 + 8 * (nk + c);
  if (bytes.size() != expected) {
    throw DataError(fmt::format("SEGW size mismatch: header implies {} bytes, got {}", expected, bytes.size()));
  }
  std::vector<double> kernel(nk);
  std::vector<double> bias(c);
  std::size_t off = 16;
  for (double& v : kernel) {
    v = std::bit_cast<double>(get_le(bytes, off, 8));
    off += 8;
  }
  for (double& v : bias) {
    v = std::bit_cast<double>(get_le(bytes, off, 8));
    off += 8;
  }
  try {
    return ModelParams(static_cast<int>(c), static_cast<int>(k), std::move(kernel), std::move(bias));
  } catch (const NumericError& e) {
    throw DataError(fmt::format("SEGW checkpoint: {}", e.what()));
  }
}

void write_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write checkpoint '{}'", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

ModelParams read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open checkpoint '{}'", path.string()));
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  return decode_checkpoint(bytes);
}

void write_train_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write train log '{}'", path.string()));
  const std::size_t nc = log.rows.empty() ? 0 : log.rows.front().weights.size();
  out << "iter,lr,loss";
  for (std::size_t c = 0; c < nc; ++c) out << ",w_" << c;
  out << '\n';
  for (const auto& row : log.rows) {
    out << row.iter << ',' << fmt::format("{}", row.lr) << ',' << fmt::format("{}", row.loss);
    for (double w : row.weights) out << ',' << fmt::format("{}", w);
    out << '\n';
  }
}

}  // namespace imbalseg
