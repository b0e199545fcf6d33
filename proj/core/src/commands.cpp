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
#include "imbalseg/commands.hpp"

#include <fstream>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "imbalseg/csv.hpp"
#include "imbalseg/error.hpp"

namespace imbalseg::commands {
namespace {

std::vector<NamedImage> load_images(const SampleManifest& manifest) {
  std::vector<NamedImage> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) out.push_back({e.id, read_input_image(e)});
  return out;
}

void write_ablation_csv(const fs::path& path, const std::vector<AblationRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "method,mIoU,fg_mIoU,rare_recall\n";
  for (const auto& r : rows) {
    out << csv::quote(r.method) << fmt::format(",{:.4f},{:.4f},{:.4f}\n", r.miou, r.fg_miou, r.rare_recall);
  }
}

}  // namespace

ClassStats cmd_stats(const fs::path& manifest_path, const ClassSet& classes, const fs::path& out_csv, bool recount) {
  SampleManifest manifest = load_manifest(manifest_path, classes);
  if (recount) {
    const SampleManifest fresh = recount_manifest(manifest);
    for (std::size_t i = 0; i < fresh.entries.size(); ++i) {
      if (fresh.entries[i].class_pixel_counts != manifest.entries[i].class_pixel_counts) {
        spdlog::warn("cached counts of '{}' differ from its label file; using recounted values", fresh.entries[i].id);
      }
    }
    manifest = fresh;
  }
  const ClassStats stats = count_pixels(manifest);
  export_stats_csv(stats, classes, out_csv);
  return stats;
}

SampleManifest cmd_synth(const SyntheticSpec& spec, const fs::path& out_dir, std::uint64_t seed, std::ostream& log) {
  const SampleManifest manifest = generate_synthetic_dataset(spec, out_dir, seed);
  const ClassStats stats = count_pixels(manifest);
  log << fmt::format("wrote {} samples to {}\n", manifest.entries.size(), out_dir.string());
  log << "class,target_share,realized_share\n";
  for (int c = 0; c < spec.class_set.num_classes(); ++c) {
    const auto uc = static_cast<std::size_t>(c);
    log << fmt::format("{},{:.4f},{:.4f}\n", spec.class_set.name(c), spec.shares[uc], stats.frequencies[uc]);
  }
  return manifest;
}

TrainResult cmd_train(const PipelineConfig& config) {
  config.validate();
  if (config.train_manifest.empty()) throw UsageError("dataset.train_manifest is not set");
  const SampleManifest manifest = load_manifest(config.train_manifest, config.class_set);
  TrainResult result = train(config.train, manifest, config.rcs, config.augment, config.acw);
  if (config.checkpoint.has_parent_path()) fs::create_directories(config.checkpoint.parent_path());
  if (config.train_log.has_parent_path()) fs::create_directories(config.train_log.parent_path());
  write_checkpoint(result.params, config.checkpoint);
  write_train_log(result.log, config.train_log);
  return result;
}

std::vector<PipelineOutput> cmd_predict(const PipelineConfig& config, const std::vector<fs::path>& checkpoints,
                                        const fs::path& manifest_path, const fs::path& out_dir, int threads) {
  config.validate();
  if (checkpoints.empty()) throw UsageError("predict needs at least one checkpoint");
  std::vector<ModelParams> models;
  for (const auto& p : checkpoints) {
    models.push_back(read_checkpoint(p));
    if (models.back().num_classes() != config.class_set.num_classes()) {
      throw DataError(fmt::format("checkpoint '{}' has {} classes, config has {}", p.string(),
                                  models.back().num_classes(), config.class_set.num_classes()));
    }
  }
  const SampleManifest manifest = load_manifest(manifest_path, config.class_set);
  const auto images = load_images(manifest);
  PipelineOptions opts;
  opts.tta = config.tta;
  if (config.post_enabled) opts.post = config.post;
  opts.out_dir = out_dir;
  opts.write_probs = config.write_probs;
  opts.threads = threads;
  return run_pipeline(images, models, opts);
}

EvalResult cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir, const ClassSet& classes,
                    const std::optional<fs::path>& report, std::ostream& log) {
  if (!fs::is_directory(gt_dir)) throw DataError(fmt::format("'{}' is not a directory", gt_dir.string()));
  if (!fs::is_directory(pred_dir)) throw DataError(fmt::format("'{}' is not a directory", pred_dir.string()));
  std::map<std::string, fs::path> gts;
  for (const auto& de : fs::directory_iterator(gt_dir)) {
    if (de.is_regular_file() && de.path().extension() == ".png") gts[de.path().stem().string()] = de.path();
  }
  if (gts.empty()) throw DataError(fmt::format("no ground-truth PNGs in '{}'", gt_dir.string()));
  ConfusionMatrix cm(classes.num_classes());
  for (const auto& [id, gt_path] : gts) {
    const fs::path pred_path = pred_dir / (id + ".png");
    if (!fs::exists(pred_path)) throw DataError(fmt::format("missing prediction for '{}'", id));
    cm = confusion_accumulate(std::move(cm), read_label_map(pred_path, classes.num_classes()),
                              read_label_map(gt_path, classes.num_classes()));
  }
  EvalResult r{cm, iou_per_class(cm), 0.0};
  r.miou = miou(r.ious);
  ReportRow row{"imbalseg", pred_dir.filename().string(), {}};
  for (std::size_t c = 0; c < r.ious.iou.size(); ++c) {
    row.ious.push_back(r.ious.present[c] ? std::optional<double>(r.ious.iou[c]) : std::nullopt);
  }
  const std::vector<ReportRow> rows{row};
  log << format_report(rows, classes);
  if (report) report_table(rows, classes, *report);
  return r;
}

AblationRow score_predictions(const std::string& method, const std::vector<LabelMap>& preds,
                              const std::vector<LabelMap>& gts, const ClassSet& classes) {
  if (preds.size() != gts.size()) throw UsageError("prediction and ground-truth counts differ");
  ConfusionMatrix cm(classes.num_classes());
  for (std::size_t i = 0; i < preds.size(); ++i) cm = confusion_accumulate(std::move(cm), preds[i], gts[i]);
  const ClassIoU ious = iou_per_class(cm);
  const auto recalls = recall_per_class(cm);
  AblationRow row{method, miou(ious), 0.0, 0.0};
  double fg = 0.0;
  double rec = 0.0;
  int nfg = 0;
  int nrec = 0;
  for (int c = 0; c < classes.num_classes(); ++c) {
    if (c == classes.background_id()) continue;
    const auto uc = static_cast<std::size_t>(c);
    if (ious.present[uc]) {
      fg += ious.iou[uc];
      ++nfg;
    }
    if (recalls[uc]) {
      rec += *recalls[uc];
      ++nrec;
    }
  }
  row.fg_miou = nfg > 0 ? fg / nfg : 0.0;
  row.rare_recall = nrec > 0 ? rec / nrec : 0.0;
  return row;
}

AblationResult cmd_ablate(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  AblationResult result;
  const ClassSet& classes = config.class_set;
  static const char* kNames[] = {"baseline", "baseline+ACWLoss", "baseline+ACWLoss+RCS_Mosaic",
                                 "baseline+ACWLoss+RCS_Mosaic+Post"};

  for (int s = 0; s < config.ablate_seeds; ++s) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(s);
    const fs::path dir = config.ablate_work_dir / fmt::format("seed_{}", seed);
    const SampleManifest train_set = generate_synthetic_dataset(config.synth, dir / "train", derive_seed(seed, "ablate.train"));
    SyntheticSpec test_spec = config.synth;
    test_spec.num_images = config.synth_test_images;
    const SampleManifest test_set = generate_synthetic_dataset(test_spec, dir / "test", derive_seed(seed, "ablate.test"));
    const auto train_samples = load_samples(train_set);
    const auto test_images = load_images(test_set);
    std::vector<LabelMap> gts;
    for (const auto& e : test_set.entries) gts.push_back(read_label_map(e.label, classes.num_classes()));

    TrainConfig tc = config.train;
    tc.seed = seed;
    AugConfig plain_aug = config.augment;
    plain_aug.mosaic_prob = 0.0;
    RcsConfig no_rcs = config.rcs;
    no_rcs.enabled = false;
    RcsConfig with_rcs = config.rcs;
    with_rcs.enabled = true;
    AcwConfig no_acw = config.acw;
    no_acw.enabled = false;
    AcwConfig with_acw = config.acw;
    with_acw.enabled = true;

    struct Variant {
      RcsConfig rcs;
      AugConfig aug;
      AcwConfig acw;
    };
    const Variant variants[] = {{no_rcs, plain_aug, no_acw}, {no_rcs, plain_aug, with_acw}, {with_rcs, config.augment, with_acw}};

    AblationSeedResult seed_result{seed, {}};
    std::vector<ModelParams> last_model;
    for (std::size_t v = 0; v < 3; ++v) {
      log << fmt::format("seed {}: training {}\n", seed, kNames[v]);
      log.flush();
      const TrainResult tr = train(tc, train_set, train_samples, variants[v].rcs, variants[v].aug, variants[v].acw);
      const std::vector<ModelParams> models{tr.params};
      PipelineOptions opts;
      opts.tta = config.tta;
      const auto outs = run_pipeline(test_images, models, opts);
      std::vector<LabelMap> preds;
      for (const auto& o : outs) preds.push_back(o.labels);
      seed_result.rows.push_back(score_predictions(kNames[v], preds, gts, classes));
      if (v == 2) last_model = models;
    }
    PipelineOptions post_opts;
    post_opts.tta = config.tta;
    post_opts.post = config.post;
    const auto outs = run_pipeline(test_images, last_model, post_opts);
    std::vector<LabelMap> preds;
    for (const auto& o : outs) preds.push_back(o.labels);
    seed_result.rows.push_back(score_predictions(kNames[3], preds, gts, classes));
    for (const auto& r : seed_result.rows) {
      log << fmt::format("  {:<36} mIoU={:.4f} fg_mIoU={:.4f} rare_recall={:.4f}\n", r.method, r.miou, r.fg_miou,
                         r.rare_recall);
    }
    result.per_seed.push_back(std::move(seed_result));
  }

  for (std::size_t v = 0; v < 4; ++v) {
    AblationRow mean{kNames[v], 0.0, 0.0, 0.0};
    for (const auto& sr : result.per_seed) {
      mean.miou += sr.rows[v].miou;
      mean.fg_miou += sr.rows[v].fg_miou;
      mean.rare_recall += sr.rows[v].rare_recall;
    }
    const auto n = static_cast<double>(result.per_seed.size());
    mean.miou /= n;
    mean.fg_miou /= n;
    mean.rare_recall /= n;
    result.mean.push_back(mean);
  }

  if (config.ablate_out.has_parent_path()) fs::create_directories(config.ablate_out.parent_path());
  write_ablation_csv(config.ablate_out, result.mean);
  fs::path per_seed = config.ablate_out;
  per_seed.replace_filename(config.ablate_out.stem().string() + ".per_seed.csv");
  std::ofstream out(per_seed, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", per_seed.string()));
  out << "seed,method,mIoU,fg_mIoU,rare_recall\n";
  for (const auto& sr : result.per_seed) {
    for (const auto& r : sr.rows) {
      out << sr.seed << ',' << csv::quote(r.method)
          << fmt::format(",{:.4f},{:.4f},{:.4f}\n", r.miou, r.fg_miou, r.rare_recall);
    }
  }
  return result;
}

}  // namespace imbalseg::commands
