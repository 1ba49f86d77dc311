// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/eval/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "mpgui/errors.hpp"

namespace mpgui::eval {

namespace {

bool is_description(std::string_view task) { return task == "MPE-QA" || task == "local-desc"; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write " + p.string());
  return f;
}

}  // namespace

const MetricRow* EvalReport::find(std::string_view task, std::string_view metric) const {
  for (const auto& m : metrics) {
    if (m.task == task && m.metric == metric) return &m;
  }
  return nullptr;
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

EvalReport build_report(std::span<const PredRecord> records, std::span<const double> bins,
                        double bin_threshold) {
  EvalReport rep;
  rep.records = records.size();
  rep.bin_threshold = bin_threshold;
  std::map<std::string, std::vector<PredRecord>> by_task;
  std::vector<PredRecord> grounding;
  for (const auto& r : records) {
    by_task[r.task].push_back(r);
    if (r.grounding()) {
      grounding.push_back(r);
      if (!r.pred_box) ++rep.unparseable;
    }
  }
  rep.grounding_records = grounding.size();
  for (const auto& [task, rs] : by_task) {
    const std::size_t n = rs.size();
    if (rs.front().grounding()) {
      for (double t : {0.1, 0.3, 0.5, 0.7}) {
        rep.metrics.push_back({task, "acc@iou=" + fmt(t).substr(0, 3), acc_at_iou(rs, t), n});
      }
      rep.metrics.push_back({task, "acc@cp", acc_cp(rs), n});
      continue;
    }
    double em = 0.0, f1 = 0.0, rl = 0.0;
    for (const auto& r : rs) {
      em += r.prediction == r.gold ? 1.0 : 0.0;
      f1 += token_f1(r.prediction, r.gold);
      rl += rouge_l(r.prediction, r.gold);
    }
    const double dn = static_cast<double>(n);
    rep.metrics.push_back({task, "exact", 100.0 * em / dn, n});
    rep.metrics.push_back({task, "token_f1", 100.0 * f1 / dn, n});
    if (is_description(task)) rep.metrics.push_back({task, "rouge_l", 100.0 * rl / dn, n});
  }
  if (!grounding.empty()) rep.bins = size_bins(grounding, bins, bin_threshold);
  return rep;
}

void write_report(const EvalReport& rep, std::span<const PredRecord> records,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    auto f = open_out(out_dir / "report.csv");
    f << "task,metric,value,n\n";
    for (const auto& m : rep.metrics) {
      f << csv_escape(m.task) << ',' << m.metric << ',' << fmt(m.value) << ',' << m.n << '\n';
    }
  }
  {
    auto f = open_out(out_dir / "size_bins.csv");
    f << "max_percent,count,accuracy\n";
    for (const auto& b : rep.bins) {
      f << fmt(b.max_percent) << ',' << b.count << ','
        << (b.accuracy ? fmt(*b.accuracy) : std::string("n/a")) << '\n';
    }
  }
  {
    auto f = open_out(out_dir / "predictions.csv");
    f << "id,task,prediction,gold,iou\n";
    for (const auto& r : records) {
      std::string v;
      if (r.grounding()) v = r.pred_box ? fmt(iou(*r.pred_box, *r.gold_box)) : "unparseable";
      f << csv_escape(r.id) << ',' << csv_escape(r.task) << ',' << csv_escape(r.prediction)
        << ',' << csv_escape(r.gold) << ',' << v << '\n';
    }
  }
  auto f = open_out(out_dir / "report.txt");
  f << "records " << rep.records << "\n";
  f << "grounding records " << rep.grounding_records << " (unparseable " << rep.unparseable
    << ")\n\n";
  for (const auto& m : rep.metrics) {
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-14s %9.2f  n=%zu\n", m.task.c_str(),
                  m.metric.c_str(), m.value, m.n);
    f << line;
  }
  if (!rep.bins.empty()) {
    f << "\nsize bins (ratio <= k%, acc@iou=" << fmt(rep.bin_threshold).substr(0, 3) << ")\n";
    for (const auto& b : rep.bins) {
      f << "  <= " << fmt(b.max_percent) << "%  n=" << b.count << "  "
        << (b.accuracy ? fmt(*b.accuracy) : std::string("n/a")) << '\n';
    }
  }
  for (const auto& n : rep.notes) f << "\nnote: " << n << '\n';
}

}  // namespace mpgui::eval
