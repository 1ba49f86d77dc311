// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mpgui/eval/metrics.hpp"

namespace mpgui::eval {

struct MetricRow {
  std::string task;
  std::string metric;
  double value = 0.0;
  std::size_t n = 0;
};

struct EvalReport {
  std::vector<MetricRow> metrics;
  std::vector<SizeBin> bins;
  double bin_threshold = 0.5;
  std::size_t records = 0;
  std::size_t grounding_records = 0;
  std::size_t unparseable = 0;  // grounding predictions with no box
  std::vector<std::string> notes;

  const MetricRow* find(std::string_view task, std::string_view metric) const;
};

// Grounding tasks get Acc@IoU at 0.1/0.3/0.5/0.7 and Acc@CP; text answers get
// exact match and token F1; descriptions add ROUGE-L.
EvalReport build_report(std::span<const PredRecord> records, std::span<const double> bins,
                        double bin_threshold);

// report.txt, report.csv, size_bins.csv and predictions.csv (one row per
// record).
void write_report(const EvalReport& report, std::span<const PredRecord> records,
                  const std::filesystem::path& out_dir);

std::string csv_escape(std::string_view s);

}  // namespace mpgui::eval
