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
#include "imbalseg/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "imbalseg/dataset_io.hpp"
#include "imbalseg/error.hpp"

namespace imbalseg {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(',', start);
    const auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_positive(const std::string& s, std::string_view what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw UsageError(fmt::format("invalid {} '{}': expected a positive number", what, s));
  }
  return v;
}

// out(y, x) = in(src(y, x)) plane by plane.
template <typename SrcFn>
std::vector<double> remap_planes(std::span<const double> in, int channels, int h, int w, SrcFn src) {
  const std::size_t plane = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  std::vector<double> out(in.size());
  for (int c = 0; c < channels; ++c) {
    const double* ip = in.data() + static_cast<std::size_t>(c) * plane;
    double* op = out.data() + static_cast<std::size_t>(c) * plane;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto [sy, sx] = src(y, x);
        op[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] =
            ip[static_cast<std::size_t>(sy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(sx)];
      }
    }
  }
  return out;
}

std::vector<double> flip_planes(std::span<const double> in, int channels, int h, int w, TtaTransform t) {
  switch (t) {
    case TtaTransform::kIdentity:
      return {in.begin(), in.end()};
    case TtaTransform::kHFlip:
      return remap_planes(in, channels, h, w, [w](int y, int x) { return std::pair{y, w - 1 - x}; });
    case TtaTransform::kVFlip:
      return remap_planes(in, channels, h, w, [h](int y, int x) { return std::pair{h - 1 - y, x}; });
    case TtaTransform::kHVFlip:
      return remap_planes(in, channels, h, w, [h, w](int y, int x) { return std::pair{h - 1 - y, w - 1 - x}; });
  }
  throw UsageError("unknown TTA transform");
}

}  // namespace

PostProcessConfig PostProcessConfig::defaults(const ClassSet& classes) {
  PostProcessConfig cfg{std::vector<double>(static_cast<std::size_t>(classes.num_classes()), 2.0), true};
  cfg.multipliers[static_cast<std::size_t>(classes.background_id())] = 0.95;
  return cfg;
}

PostProcessConfig PostProcessConfig::neutral(const ClassSet& classes) {
  return {std::vector<double>(static_cast<std::size_t>(classes.num_classes()), 1.0), true};
}

void PostProcessConfig::validate(int num_classes) const {
  if (static_cast<int>(multipliers.size()) != num_classes) {
    throw UsageError(fmt::format("{} post-process multipliers for {} classes", multipliers.size(), num_classes));
  }
  for (double m : multipliers) {
    if (!(m > 0.0) || !std::isfinite(m)) throw UsageError(fmt::format("post-process multiplier {} must be > 0", m));
  }
}

PostProcessConfig parse_post_multipliers(std::string_view text, const ClassSet& classes) {
  PostProcessConfig cfg = PostProcessConfig::defaults(classes);
  const auto bg = static_cast<std::size_t>(classes.background_id());
  for (const auto& item : split_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("post-process multiplier '{}' is not key=value", item));
    const std::string key = trim(std::string_view(item).substr(0, eq));
    const double value = parse_positive(trim(std::string_view(item).substr(eq + 1)), "multiplier");
    if (key == "bg") {
      cfg.multipliers[bg] = value;
    } else if (key == "fg") {
      for (std::size_t c = 0; c < cfg.multipliers.size(); ++c) {
        if (c != bg) cfg.multipliers[c] = value;
      }
    } else {
      int c = -1;
      for (int i = 0; i < classes.num_classes(); ++i) {
        if (classes.name(i) == key) c = i;
      }
      if (c < 0) {
        std::size_t used = 0;
        try {
          c = std::stoi(key, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != key.size() || c < 0 || c >= classes.num_classes()) {
          throw UsageError(fmt::format("unknown class '{}' in post-process multipliers", key));
        }
      }
      cfg.multipliers[static_cast<std::size_t>(c)] = value;
    }
  }
  return cfg;
}

void TtaConfig::validate() const {
  if (transforms.empty()) throw UsageError("TTA needs at least one transform");
  if (std::find(transforms.begin(), transforms.end(), TtaTransform::kIdentity) == transforms.end()) {
    throw UsageError("TTA transforms must include identity");
  }
}

TtaConfig parse_tta(std::string_view text) {
  const std::string t = trim(text);
  if (t == "none" || t == "identity") return TtaConfig::identity_only();
  if (t == "all") return TtaConfig{};
  TtaConfig cfg{{}};
  for (const auto& name : split_list(t)) {
    TtaTransform tr;
    if (name == "identity") {
      tr = TtaTransform::kIdentity;
    } else if (name == "hflip") {
      tr = TtaTransform::kHFlip;
    } else if (name == "vflip") {
      tr = TtaTransform::kVFlip;
    } else if (name == "hvflip") {
      tr = TtaTransform::kHVFlip;
    } else {
      throw UsageError(fmt::format("unknown TTA transform '{}'", name));
    }
    if (std::find(cfg.transforms.begin(), cfg.transforms.end(), tr) == cfg.transforms.end()) cfg.transforms.push_back(tr);
  }
  cfg.validate();
  return cfg;
}

std::string format_tta(const TtaConfig& tta) {
  std::string out;
  for (const auto t : tta.transforms) {
    if (!out.empty()) out += ',';
    switch (t) {
      case TtaTransform::kIdentity: out += "identity"; break;
      case TtaTransform::kHFlip: out += "hflip"; break;
      case TtaTransform::kVFlip: out += "vflip"; break;
      case TtaTransform::kHVFlip: out += "hvflip"; break;
    }
  }
  return out;
}

InputImage apply_transform(const InputImage& image, TtaTransform t) {
  return InputImage(image.height(), image.width(), flip_planes(image.data(), 4, image.height(), image.width(), t));
}

ProbMap apply_transform(const ProbMap& probs, TtaTransform t) {
  Tensor3 out(probs.channels(), probs.height(), probs.width());
  out.data = flip_planes(probs.data(), probs.channels(), probs.height(), probs.width(), t);
  return ProbMap(std::move(out), probs.normalized());
}

ProbMap tta_predict(const Predictor& model, const InputImage& image, const TtaConfig& tta) {
  tta.validate();
  std::vector<ProbMap> maps;
  maps.reserve(tta.transforms.size());
  for (const auto t : tta.transforms) maps.push_back(apply_transform(model(apply_transform(image, t)), t));
  const ProbMap& first = maps.front();
  Tensor3 acc(first.channels(), first.height(), first.width(), 0.0);
  for (const auto& m : maps) {
    if (m.channels() != acc.channels || m.height() != acc.height || m.width() != acc.width) {
      throw UsageError("model output dimensions differ across TTA transforms");
    }
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += m.data()[i];
  }
  const double k = static_cast<double>(maps.size());
  for (double& v : acc.data) v /= k;
  const bool normalized = std::all_of(maps.begin(), maps.end(), [](const ProbMap& m) { return m.normalized(); });
  return normalized ? ProbMap(std::move(acc), true) : normalize(ProbMap(std::move(acc)));
}

ProbMap tta_predict(const ModelParams& model, const InputImage& image, const TtaConfig& tta) {
  return tta_predict([&model](const InputImage& img) { return predict(model, img); }, image, tta);
}

ProbMap ensemble_mean(std::span<const ProbMap> maps) {
  if (maps.empty()) throw UsageError("ensemble needs at least one probability map");
  const ProbMap& first = maps.front();
  for (const auto& m : maps) {
    if (m.channels() != first.channels() || m.height() != first.height() || m.width() != first.width()) {
      throw UsageError(fmt::format("ensemble maps differ in shape: {}x{}x{} vs {}x{}x{}", m.channels(), m.height(),
                                   m.width(), first.channels(), first.height(), first.width()));
    }
    if (!m.normalized()) throw UsageError("ensemble inputs must be normalized probability maps");
  }
  Tensor3 out(first.channels(), first.height(), first.width());
  std::vector<double> vals(maps.size());
  const double k = static_cast<double>(maps.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    for (std::size_t m = 0; m < maps.size(); ++m) vals[m] = maps[m].data()[i];
    std::sort(vals.begin(), vals.end());
    double sum = 0.0;
    for (double v : vals) sum += v;
    out.data[i] = std::clamp(sum / k, vals.front(), vals.back());
  }
  return ProbMap(std::move(out), true);
}

ProbMap postprocess(const ProbMap& probs, const PostProcessConfig& config) {
  config.validate(probs.channels());
  Tensor3 scaled = probs.values();
  const std::size_t plane = scaled.plane_size();
  for (std::size_t c = 0; c < static_cast<std::size_t>(scaled.channels); ++c) {
    const double m = config.multipliers[c];
    for (std::size_t p = 0; p < plane; ++p) scaled.data[c * plane + p] *= m;
  }
  ProbMap out(std::move(scaled));
  return config.renormalize ? normalize(out) : out;
}

std::vector<PipelineOutput> run_pipeline(std::span<const NamedImage> images, std::span<const ModelParams> models,
                                         const PipelineOptions& options) {
  if (models.empty()) throw UsageError("pipeline needs at least one model");
  options.tta.validate();
  if (options.post) options.post->validate(models.front().num_classes());
  for (const auto& m : models) {
    if (m.num_classes() != models.front().num_classes()) throw UsageError("ensemble models disagree on class count");
  }
  if (options.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.out_dir, ec);
    if (!std::filesystem::is_directory(*options.out_dir)) {
      throw DataError(fmt::format("cannot create output directory '{}'", options.out_dir->string()));
    }
  }

  std::vector<std::optional<PipelineOutput>> results(images.size());
  std::vector<std::filesystem::path> written;
  std::mutex mu;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= images.size() || stop.load()) return;
      try {
        const auto& item = images[i];
        std::vector<ProbMap> per_model;
        per_model.reserve(models.size());
        for (const auto& m : models) per_model.push_back(tta_predict(m, item.image, options.tta));
        ProbMap fused = ensemble_mean(per_model);
        if (options.post) fused = postprocess(fused, *options.post);
        PipelineOutput out{item.id, argmax_map(fused), std::move(fused)};
        if (options.out_dir) {
          const auto label_path = *options.out_dir / (item.id + ".png");
          {
            std::lock_guard lock(mu);
            written.push_back(label_path);
          }
          write_label_map(out.labels, label_path);
          if (options.write_probs) {
            const auto prob_path = *options.out_dir / (item.id + ".segp");
            {
              std::lock_guard lock(mu);
              written.push_back(prob_path);
            }
            write_prob_map(out.probs, prob_path);
          }
        }
        results[i] = std::move(out);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
        return;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(images.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (failure) {
    for (const auto& p : written) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
    std::rethrow_exception(failure);
  }
  std::vector<PipelineOutput> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace imbalseg
