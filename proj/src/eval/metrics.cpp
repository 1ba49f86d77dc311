// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "mpgui/errors.hpp"

namespace mpgui::eval {

double iou(const BBox& a, const BBox& b, bool* degenerate) {
  const bool bad = !a.valid() || !b.valid();
  if (degenerate != nullptr) *degenerate = bad;
  if (bad) return 0.0;
  const long long iw = std::min(a.x_right, b.x_right) - std::max(a.x_left, b.x_left);
  const long long ih = std::min(a.y_bottom, b.y_bottom) - std::max(a.y_top, b.y_top);
  const long long inter = iw > 0 && ih > 0 ? iw * ih : 0;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

void require_nonempty(std::span<const PredRecord> records, const char* what) {
  if (records.empty()) throw ContractError(std::string(what) + ": empty record set");
}

void require_grounding(const PredRecord& r, const char* what) {
  if (!r.gold_box) throw ContractError(std::string(what) + ": record " + r.id + " has no gold box");
}

}  // namespace

double acc_at_iou(std::span<const PredRecord> records, double threshold) {
  require_nonempty(records, "acc_at_iou");
  std::size_t hits = 0;
  for (const auto& r : records) {
    require_grounding(r, "acc_at_iou");
    if (r.pred_box && iou(*r.pred_box, *r.gold_box) >= threshold) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
}

bool centroid_inside(const BBox& pred, const BBox& gold) {
  // Compare at twice the scale so half-unit centroids stay exact.
  const long long cx = static_cast<long long>(pred.x_left) + pred.x_right;
  const long long cy = static_cast<long long>(pred.y_top) + pred.y_bottom;
  return 2LL * gold.x_left <= cx && cx <= 2LL * gold.x_right && 2LL * gold.y_top <= cy &&
         cy <= 2LL * gold.y_bottom;
}

double acc_cp(std::span<const PredRecord> records) {
  require_nonempty(records, "acc_cp");
  std::size_t hits = 0;
  for (const auto& r : records) {
    require_grounding(r, "acc_cp");
    if (r.pred_box && centroid_inside(*r.pred_box, *r.gold_box)) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
}

std::vector<SizeBin> size_bins(std::span<const PredRecord> records, std::span<const double> bins,
                               double threshold) {
  for (std::size_t i = 1; i < bins.size(); ++i) {
    if (!(bins[i - 1] < bins[i])) throw ContractError("size_bins: bins must be ascending");
  }
  std::vector<SizeBin> out;
  for (double k : bins) {
    std::vector<PredRecord> in;
    for (const auto& r : records) {
      if (!r.gold_px || r.width <= 0 || r.height <= 0) {
        throw ContractError("size_bins: record " + r.id + " lacks gold pixels or scene dims");
      }
      const double ratio = static_cast<double>(r.gold_px->area()) /
                           (static_cast<double>(r.width) * r.height) * 100.0;
      if (ratio <= k) in.push_back(r);
    }
    SizeBin b;
    b.max_percent = k;
    b.count = in.size();
    if (!in.empty()) b.accuracy = acc_at_iou(in, threshold);
    out.push_back(b);
  }
  return out;
}

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    clean.push_back(static_cast<char>(std::tolower(u)));
  }
  std::istringstream in(clean);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double token_f1(std::string_view pred, std::string_view gold) {
  const auto p = normalize_tokens(pred);
  const auto g = normalize_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : g) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::string_view pred, std::string_view gold) {
  const auto p = normalize_tokens(pred);
  const auto g = normalize_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  const double l = static_cast<double>(lcs_length(p, g));
  if (l == 0.0) return 0.0;
  const double precision = l / static_cast<double>(p.size());
  const double recall = l / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

double separation_score(std::span<const std::vector<double>> x, std::span<const char> labels) {
  if (x.size() != labels.size()) {
    throw ShapeError("separation_score: " + std::to_string(x.size()) + " points, " +
                     std::to_string(labels.size()) + " labels");
  }
  std::map<char, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  if (members.size() < 2) throw ContractError("separation_score: need at least two labels");
  for (const auto& [l, m] : members) {
    if (m.size() < 2) {
      throw ContractError(std::string("separation_score: label ") + l + " has fewer than 2 points");
    }
  }
  const std::size_t d = x.front().size();
  std::map<char, std::vector<double>> centroid;
  for (const auto& [l, m] : members) {
    std::vector<double> c(d, 0.0);
    for (std::size_t i : m) {
      if (x[i].size() != d) throw ShapeError("separation_score: ragged embeddings");
      for (std::size_t k = 0; k < d; ++k) c[k] += x[i][k];
    }
    for (double& v : c) v /= static_cast<double>(m.size());
    centroid[l] = std::move(c);
  }
  auto dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double own = dist(x[i], centroid[labels[i]]);
    double other = INFINITY;
    for (const auto& [l, c] : centroid) {
      if (l != labels[i]) other = std::min(other, dist(x[i], c));
    }
    const double denom = std::max(own, other);
    total += denom > 0.0 ? (other - own) / denom : 0.0;
  }
  return total / static_cast<double>(x.size());
}

}  // namespace mpgui::eval
