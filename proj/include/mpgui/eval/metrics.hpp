// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpgui/bbox.hpp"

namespace mpgui::eval {

// Intersection over union. A zero-area box contributes no overlap and the
// result is 0; `degenerate` is set when either box is empty.
double iou(const BBox& a, const BBox& b, bool* degenerate = nullptr);

struct PredRecord {
  std::string id;
  std::string task;
  std::string prediction;
  std::optional<BBox> pred_box;  // parsed from prediction, grounding only
  std::string gold;
  std::optional<BBox> gold_box;
  int width = 0;   // scene pixels
  int height = 0;
  // Gold box in pixels, for size binning.
  std::optional<BBox> gold_px;

  bool grounding() const { return gold_box.has_value(); }
};

// Percentage of records with iou >= threshold. Unparseable predictions miss.
// Throws ContractError on an empty set.
double acc_at_iou(std::span<const PredRecord> records, double threshold);

// Percentage whose predicted centroid lies inside the gold box, edges
// included.
double acc_cp(std::span<const PredRecord> records);
bool centroid_inside(const BBox& pred, const BBox& gold);

struct SizeBin {
  double max_percent = 0.0;
  std::size_t count = 0;
  std::optional<double> accuracy;  // empty when the bin holds no records
};

// Cumulative bins: bin k holds every record whose gold ratio <= bins[k].
std::vector<SizeBin> size_bins(std::span<const PredRecord> records, std::span<const double> bins,
                               double threshold);

inline constexpr double kDefaultBins[] = {0.3, 1.0, 5.0, 100.0};

// Lowercase, drop punctuation, split on whitespace.
std::vector<std::string> normalize_tokens(std::string_view text);
double token_f1(std::string_view pred, std::string_view gold);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);
// LCS F-measure over normalized tokens with beta = 1.
double rouge_l(std::string_view pred, std::string_view gold);

// Mean over points of (d_other - d_own) / max(d_own, d_other), where d_own is
// the distance to the point's label centroid and d_other the distance to the
// nearest other centroid. A point with both distances 0 scores 0.
double separation_score(std::span<const std::vector<double>> embeddings,
                        std::span<const char> labels);

}  // namespace mpgui::eval
