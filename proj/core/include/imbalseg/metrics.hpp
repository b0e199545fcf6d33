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
#ifndef IMBALSEG_METRICS_HPP_
#define IMBALSEG_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imbalseg/types.hpp"

namespace imbalseg {

// cm(g, p) counts valid pixels with ground truth g predicted as p.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = 0);

  int num_classes() const { return num_classes_; }
  std::uint64_t at(int gt, int pred) const { return cells_[index(gt, pred)]; }
  std::uint64_t total() const;
  std::uint64_t row_sum(int gt) const;
  std::uint64_t col_sum(int pred) const;

  // Adds one pixel pair; used by accumulate and by tests building matrices.
  void add(int gt, int pred, std::uint64_t n = 1) { cells_[index(gt, pred)] += n; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(int gt, int pred) const {
    return static_cast<std::size_t>(gt) * static_cast<std::size_t>(num_classes_) + static_cast<std::size_t>(pred);
  }

  int num_classes_ = 0;
  std::vector<std::uint64_t> cells_;
};

// Increments cm for each pixel that is valid in the ground truth.
ConfusionMatrix confusion_accumulate(ConfusionMatrix cm, const LabelMap& pred, const LabelMap& gt);

struct ClassIoU {
  std::vector<double> iou;   // 0 for absent classes
  std::vector<bool> present;  // false when TP + FP + FN == 0
};

ClassIoU iou_per_class(const ConfusionMatrix& cm);

// Mean over the present classes; throws when none is present.
double miou(std::span<const double> ious, const std::vector<bool>& present);
double miou(const ClassIoU& ious);

// Recall TP / (TP + FN) per class; nullopt for classes absent from the ground truth.
std::vector<std::optional<double>> recall_per_class(const ConfusionMatrix& cm);

// One row of a per-class IoU report.
struct ReportRow {
  std::string architecture;
  std::string backbone;
  std::vector<std::optional<double>> ious;  // nullopt prints as an empty cell
};

// CSV `architecture,backbone,<class names...>,mIoU` with three decimals. The
// mIoU column is recomputed from the printed per-class values.
void report_table(std::span<const ReportRow> rows, const ClassSet& classes, const std::filesystem::path& path);
std::string format_report(std::span<const ReportRow> rows, const ClassSet& classes);

struct ParsedReportRow {
  ReportRow row;
  double miou = 0.0;
};
std::vector<ParsedReportRow> read_report_table(const std::filesystem::path& path, const ClassSet& classes);

}  // namespace imbalseg

#endif  // IMBALSEG_METRICS_HPP_
