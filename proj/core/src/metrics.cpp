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
#include "imbalseg/metrics.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "imbalseg/csv.hpp"
#include "imbalseg/error.hpp"

namespace imbalseg {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      cells_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::row_sum(int gt) const {
  std::uint64_t s = 0;
  for (int p = 0; p < num_classes_; ++p) s += at(gt, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(int pred) const {
  std::uint64_t s = 0;
  for (int g = 0; g < num_classes_; ++g) s += at(g, pred);
  return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) throw UsageError("confusion matrices differ in class count");
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
  return *this;
}

ConfusionMatrix confusion_accumulate(ConfusionMatrix cm, const LabelMap& pred, const LabelMap& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw UsageError(fmt::format("prediction is {}x{} but ground truth is {}x{}", pred.height(), pred.width(),
                                 gt.height(), gt.width()));
  }
  if (pred.num_classes() > cm.num_classes() || gt.num_classes() > cm.num_classes()) {
    throw UsageError("label maps have more classes than the confusion matrix");
  }
  const auto p = pred.labels();
  const auto g = gt.labels();
  const auto valid = gt.valid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!valid.empty() && !valid[i]) continue;
    cm.add(g[i], p[i]);
  }
  return cm;
}

ClassIoU iou_per_class(const ConfusionMatrix& cm) {
  const int n = cm.num_classes();
  ClassIoU out{std::vector<double>(static_cast<std::size_t>(n), 0.0), std::vector<bool>(static_cast<std::size_t>(n), false)};
  for (int c = 0; c < n; ++c) {
    const std::uint64_t tp = cm.at(c, c);
    const std::uint64_t denom = cm.row_sum(c) + cm.col_sum(c) - tp;
    if (denom == 0) continue;
    out.present[static_cast<std::size_t>(c)] = true;
    out.iou[static_cast<std::size_t>(c)] = static_cast<double>(tp) / static_cast<double>(denom);
  }
  return out;
}

double miou(std::span<const double> ious, const std::vector<bool>& present) {
  if (ious.size() != present.size()) throw UsageError("IoU and presence vectors differ in length");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < ious.size(); ++c) {
    if (!present[c]) continue;
    sum += ious[c];
    ++n;
  }
  if (n == 0) throw DataError("mIoU is undefined: no class is present");
  return sum / static_cast<double>(n);
}

double miou(const ClassIoU& ious) { return miou(ious.iou, ious.present); }

std::vector<std::optional<double>> recall_per_class(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(cm.num_classes()));
  for (int c = 0; c < cm.num_classes(); ++c) {
    const std::uint64_t row = cm.row_sum(c);
    if (row > 0) out[static_cast<std::size_t>(c)] = static_cast<double>(cm.at(c, c)) / static_cast<double>(row);
  }
  return out;
}

std::string format_report(std::span<const ReportRow> rows, const ClassSet& classes) {
  std::ostringstream out;
  out << "architecture,backbone";
  for (const auto& name : classes.names()) out << ',' << csv::quote(name);
  out << ",mIoU\n";
  for (const auto& row : rows) {
    if (static_cast<int>(row.ious.size()) != classes.num_classes()) {
      throw UsageError(fmt::format("report row '{}' has {} values for {} classes", row.architecture, row.ious.size(),
                                   classes.num_classes()));
    }
    out << csv::quote(row.architecture) << ',' << csv::quote(row.backbone);
    // The mean is taken over the rounded values that are printed.
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : row.ious) {
      out << ',';
      if (v) {
        const std::string cell = fmt::format("{:.3f}", *v);
        out << cell;
        sum += std::stod(cell);
        ++n;
      }
    }
    out << ',';
    if (n > 0) out << fmt::format("{:.3f}", sum / static_cast<double>(n));
    out << '\n';
  }
  return out.str();
}

void report_table(std::span<const ReportRow> rows, const ClassSet& classes, const std::filesystem::path& path) {
  const std::string text = format_report(rows, classes);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write report '{}'", path.string()));
  out << text;
  if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

std::vector<ParsedReportRow> read_report_table(const std::filesystem::path& path, const ClassSet& classes) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open report '{}'", path.string()));
  const auto rows = csv::read_all(in);
  const std::size_t width = static_cast<std::size_t>(classes.num_classes()) + 3;
  if (rows.empty() || rows.front().size() != width || rows.front().front() != "architecture") {
    throw DataError(fmt::format("'{}' is not a per-class IoU report for {} classes", path.string(), classes.num_classes()));
  }
  std::vector<ParsedReportRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != width) throw DataError(fmt::format("'{}' row {} has {} fields, expected {}", path.string(), r, f.size(), width));
    ParsedReportRow parsed{{f[0], f[1], {}}, 0.0};
    try {
      for (std::size_t c = 0; c < static_cast<std::size_t>(classes.num_classes()); ++c) {
        const auto& cell = f[2 + c];
        parsed.row.ious.push_back(cell.empty() ? std::nullopt : std::optional<double>(std::stod(cell)));
      }
      parsed.miou = f.back().empty() ? std::nan("") : std::stod(f.back());
    } catch (const std::exception&) {
      throw DataError(fmt::format("'{}' row {} has a non-numeric cell", path.string(), r));
    }
    out.push_back(std::move(parsed));
  }
  return out;
}

}  // namespace imbalseg
