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
#include "imbalseg/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "imbalseg/error.hpp"

namespace imbalseg {
namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw UsageError(fmt::format("{}: '{}' is not a number", key, v));
  return d;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw UsageError(fmt::format("{}: '{}' is not an integer", key, v));
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError(fmt::format("{}: '{}' is not a boolean", key, v));
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_commas(v)) out.push_back(to_double(key, item));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt::format("{}", v[i]);
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

fs::path resolve(const fs::path& base, const std::string& v) {
  const fs::path p(v);
  if (p.empty() || p.is_absolute() || base.empty() || base == ".") return p;
  return (base / p).lexically_normal();
}

struct Key {
  std::function<void(PipelineConfig&, const std::string& key, const std::string& value, const fs::path& base)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define IMBALSEG_NUM_KEY(name, field, conv)                                                                  \
  {                                                                                                          \
    name, Key {                                                                                              \
      [](PipelineConfig& c, const std::string& k, const std::string& v, const fs::path&) { c.field = conv; }, \
          [](const PipelineConfig& c) { return fmt::format("{}", c.field); }                                 \
    }                                                                                                        \
  }

#define IMBALSEG_BOOL_KEY(name, field)                                                                         \
  {                                                                                                            \
    name, Key {                                                                                                \
      [](PipelineConfig& c, const std::string& k, const std::string& v, const fs::path&) { c.field = to_bool(k, v); }, \
          [](const PipelineConfig& c) { return fmt_bool(c.field); }                                            \
    }                                                                                                          \
  }

#define IMBALSEG_PATH_KEY(name, field)                                                                      \
  {                                                                                                         \
    name, Key {                                                                                             \
      [](PipelineConfig& c, const std::string&, const std::string& v, const fs::path& b) { c.field = resolve(b, v); }, \
          [](const PipelineConfig& c) { return c.field.string(); }                                          \
    }                                                                                                       \
  }

// Keys whose values depend on the class set are applied after dataset.*.
const std::vector<std::pair<std::string, Key>>& key_table() {
  static const std::vector<std::pair<std::string, Key>> table = {
      IMBALSEG_NUM_KEY("seed", seed, to_int<std::uint64_t>(k, v)),
      IMBALSEG_PATH_KEY("dataset.train_manifest", train_manifest),
      IMBALSEG_PATH_KEY("dataset.test_manifest", test_manifest),
      {"synth.shares", Key{[](PipelineConfig& c, const std::string& k, const std::string& v,
                              const fs::path&) { c.synth.shares = to_doubles(k, v); },
                           [](const PipelineConfig& c) { return join(c.synth.shares); }}},
      IMBALSEG_NUM_KEY("synth.image_size", synth.image_size, to_int<int>(k, v)),
      IMBALSEG_NUM_KEY("synth.num_images", synth.num_images, to_int<int>(k, v)),
      IMBALSEG_NUM_KEY("synth.test_images", synth_test_images, to_int<int>(k, v)),
      IMBALSEG_NUM_KEY("synth.min_radius", synth.min_radius, to_int<int>(k, v)),
      IMBALSEG_NUM_KEY("synth.max_radius", synth.max_radius, to_int<int>(k, v)),
      IMBALSEG_NUM_KEY("synth.noise_std", synth.noise_std, to_double(k, v)),
      IMBALSEG_NUM_KEY("synth.offset_std", synth.offset_std, to_double(k, v)),
      IMBALSEG_BOOL_KEY("rcs.enabled", rcs.enabled),
      IMBALSEG_NUM_KEY("rcs.temperature", rcs.temperature, to_double(k, v)),
      IMBALSEG_NUM_KEY("rcs.min_pixels", rcs.min_pixels, to_int<std::uint64_t>(k, v)),
      IMBALSEG_BOOL_KEY("rcs.include_background", rcs.include_background),
      IMBALSEG_NUM_KEY("augment.crop_size", augment.crop_size, to_int<int>(k, v)),
      IMBALSEG_NUM_KEY("augment.hflip_prob", augment.hflip_prob, to_double(k, v)),
      IMBALSEG_NUM_KEY("augment.vflip_prob", augment.vflip_prob, to_double(k, v)),
      IMBALSEG_NUM_KEY("augment.rotate_prob", augment.rotate_prob, to_double(k, v)),
      IMBALSEG_NUM_KEY("augment.scale_lo", augment.scale_lo, to_double(k, v)),
      IMBALSEG_NUM_KEY("augment.scale_hi", augment.scale_hi, to_double(k, v)),
      IMBALSEG_NUM_KEY("augment.brightness", augment.brightness, to_double(k, v)),
      IMBALSEG_NUM_KEY("augment.contrast", augment.contrast, to_double(k, v)),
      IMBALSEG_NUM_KEY("augment.saturation", augment.saturation, to_double(k, v)),
      IMBALSEG_NUM_KEY("augment.mosaic_prob", augment.mosaic_prob, to_double(k, v)),
      IMBALSEG_NUM_KEY("augment.mosaic_center_jitter", augment.mosaic_center_jitter, to_double(k, v)),
      IMBALSEG_BOOL_KEY("acw.enabled", acw.enabled),
      IMBALSEG_NUM_KEY("acw.epsilon", acw.epsilon, to_double(k, v)),
      IMBALSEG_NUM_KEY("acw.iota", acw.iota, to_double(k, v)),
      IMBALSEG_NUM_KEY("train.max_iter", train.max_iter, to_int<int>(k, v)),
      IMBALSEG_NUM_KEY("train.batch_size", train.batch_size, to_int<int>(k, v)),
      IMBALSEG_NUM_KEY("train.lr0", train.lr0, to_double(k, v)),
      IMBALSEG_NUM_KEY("train.power", train.power, to_double(k, v)),
      IMBALSEG_NUM_KEY("train.warmup_iters", train.warmup_iters, to_int<int>(k, v)),
      IMBALSEG_NUM_KEY("train.weight_decay", train.weight_decay, to_double(k, v)),
      IMBALSEG_NUM_KEY("train.kernel_size", train.kernel_size, to_int<int>(k, v)),
      IMBALSEG_PATH_KEY("train.checkpoint", checkpoint),
      IMBALSEG_PATH_KEY("train.log", train_log),
      {"tta.transforms", Key{[](PipelineConfig& c, const std::string&, const std::string& v,
                                const fs::path&) { c.tta = parse_tta(v); },
                             [](const PipelineConfig& c) { return format_tta(c.tta); }}},
      IMBALSEG_BOOL_KEY("post.enabled", post_enabled),
      IMBALSEG_BOOL_KEY("post.renormalize", post.renormalize),
      {"post.multipliers", Key{[](PipelineConfig& c, const std::string&, const std::string& v,
                                  const fs::path&) {
                                 const bool renorm = c.post.renormalize;
                                 c.post = parse_post_multipliers(v, c.class_set);
                                 c.post.renormalize = renorm;
                               },
                               [](const PipelineConfig& c) {
                                 std::string out;
                                 for (std::size_t i = 0; i < c.post.multipliers.size(); ++i) {
                                   out += fmt::format("{}{}={}", i ? "," : "", i, c.post.multipliers[i]);
                                 }
                                 return out;
                               }}},
      IMBALSEG_PATH_KEY("predict.out_dir", predict_out),
      IMBALSEG_BOOL_KEY("predict.write_probs", write_probs),
      IMBALSEG_PATH_KEY("eval.report", eval_report),
      IMBALSEG_NUM_KEY("ablate.seeds", ablate_seeds, to_int<int>(k, v)),
      IMBALSEG_PATH_KEY("ablate.work_dir", ablate_work_dir),
      IMBALSEG_PATH_KEY("ablate.out", ablate_out),
  };
  return table;
}

#undef IMBALSEG_NUM_KEY
#undef IMBALSEG_BOOL_KEY
#undef IMBALSEG_PATH_KEY

}  // namespace

PipelineConfig PipelineConfig::desk_defaults() {
  PipelineConfig c;
  c.augment.crop_size = 56;
  c.augment.scale_lo = 0.875;
  c.augment.scale_hi = 1.125;
  c.rcs.min_pixels = 128;
  c.train.max_iter = 600;
  c.train.batch_size = 4;
  c.train.lr0 = 1.0;
  return c;
}

void PipelineConfig::validate() const {
  if (synth.class_set != class_set) throw UsageError("synthetic spec and dataset use different class sets");
  synth.validate();
  if (synth_test_images < 1) throw UsageError("synth.test_images must be >= 1");
  rcs.validate();
  augment.validate();
  acw.validate();
  train.validate();
  tta.validate();
  post.validate(class_set.num_classes());
  if (ablate_seeds < 1) throw UsageError("ablate.seeds must be >= 1");
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  // First pass: collect keys, so dataset.* can be applied before anything
  // that refers to class names.
  std::map<std::string, std::string> values;
  std::vector<std::string> order;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("config line {}: expected key=value", line_no));
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (values.contains(key)) throw UsageError(fmt::format("config line {}: duplicate key '{}'", line_no, key));
    values[key] = value;
    order.push_back(key);
  }

  PipelineConfig c = PipelineConfig::desk_defaults();
  if (values.contains("dataset.classes") || values.contains("dataset.background")) {
    std::vector<std::string> names = c.class_set.names();
    int bg = c.class_set.background_id();
    if (values.contains("dataset.classes")) names = split_commas(values["dataset.classes"]);
    if (values.contains("dataset.background")) bg = to_int<int>("dataset.background", values["dataset.background"]);
    c.class_set = ClassSet(std::move(names), bg);
    c.synth = SyntheticSpec::default_spec(c.class_set);
    c.post = PostProcessConfig::defaults(c.class_set);
  }

  const auto& table = key_table();
  auto find = [&](const std::string& key) -> const Key* {
    for (const auto& [name, k] : table) {
      if (name == key) return &k;
    }
    return nullptr;
  };
  for (const auto& key : order) {
    if (key == "dataset.classes" || key == "dataset.background" || key == "post.multipliers") continue;
    const Key* k = find(key);
    if (k == nullptr) throw UsageError(fmt::format("unknown config key '{}'", key));
    k->set(c, key, values[key], base_dir);
  }
  if (values.contains("post.multipliers")) find("post.multipliers")->set(c, "post.multipliers", values["post.multipliers"], base_dir);
  c.synth.class_set = c.class_set;
  c.train.seed = c.seed;
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::absolute(path).parent_path());
}

std::string to_text(const PipelineConfig& config) {
  std::string out;
  std::string names;
  for (const auto& n : config.class_set.names()) names += (names.empty() ? "" : ",") + n;
  out += "dataset.classes=" + names + "\n";
  out += fmt::format("dataset.background={}\n", config.class_set.background_id());
  for (const auto& [name, key] : key_table()) out += name + "=" + key.get(config) + "\n";
  return out;
}

SyntheticSpec parse_synthetic_spec(std::string_view text, const ClassSet& classes) {
  SyntheticSpec spec = SyntheticSpec::default_spec(classes);
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("spec line {}: expected key=value", line_no));
    std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string v = trim(std::string_view(t).substr(eq + 1));
    if (key.starts_with("synth.")) key.erase(0, 6);
    if (key == "shares") {
      spec.shares = to_doubles(key, v);
    } else if (key == "image_size") {
      spec.image_size = to_int<int>(key, v);
    } else if (key == "num_images") {
      spec.num_images = to_int<int>(key, v);
    } else if (key == "min_radius") {
      spec.min_radius = to_int<int>(key, v);
    } else if (key == "max_radius") {
      spec.max_radius = to_int<int>(key, v);
    } else if (key == "noise_std") {
      spec.noise_std = to_double(key, v);
    } else if (key == "offset_std") {
      spec.offset_std = to_double(key, v);
    } else {
      throw UsageError(fmt::format("unknown synthetic spec key '{}'", key));
    }
  }
  spec.validate();
  return spec;
}

}  // namespace imbalseg
