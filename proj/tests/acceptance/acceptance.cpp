// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mpgui/cli/commands.hpp"
#include "mpgui/data/datasets.hpp"
#include "mpgui/data/scene.hpp"
#include "mpgui/eval/metrics.hpp"
#include "mpgui/model/model.hpp"
#include "mpgui/model/tiling.hpp"
#include "mpgui/rng.hpp"
#include "mpgui/tensor/params.hpp"
#include "mpgui/training/stage.hpp"
#include "mpgui/training/trainer.hpp"

using namespace mpgui;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path tmp(const std::string& name) {
  const fs::path p = fs::path(MPGUI_TEST_TMP) / "acceptance" / name;
  fs::create_directories(p.parent_path());
  return p;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Tensor randn(std::size_t r, std::size_t c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  std::vector<double> v(r * c);
  for (auto& x : v) x = n(rng);
  return Tensor::from(r, c, v, true);
}

GrayImage noise_image(int w, int h, std::mt19937_64& rng) {
  GrayImage img(w, h);
  std::uniform_int_distribution<int> px(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(px(rng));
  return img;
}

// 50 screens shared by the MTS and overfit runs.
const fs::path& desk() {
  static const fs::path dir = [] {
    const fs::path d = tmp("desk");
    cli::ForgeConfig fc;
    fc.screens = 50;
    fc.seed = 7;
    std::ostringstream log;
    cli::cmd_forge(fc, d, true, "", log);
    return d;
  }();
  return dir;
}

// ---------------------------------------------------------------------------

Outcome ac1_gradients() {
  constexpr int kSeeds = 50;
  constexpr double kEps = 1e-5;
  // Entries below this magnitude are compared on an absolute scale. At eps
  // 1e-5 the central difference of an O(1) loss carries ~1e-10 of roundoff,
  // which is 1e-4 of a 1e-6 gradient.
  constexpr double kFloor = 1e-5;
  double worst = 0.0;
  std::string worst_at;
  std::size_t checked = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    auto rng = make_rng(seed, "ac1");
    model::ModelConfig cfg;
    cfg.tile_side = 14;
    cfg.patch_side = 7;
    cfg.max_tiles = std::uniform_int_distribution<int>(1, 2)(rng);  // N in {4, 8}
    cfg.feature_width = 8;
    cfg.model_width = 4 * (1 + seed % 4);  // D in {4, 8, 12, 16}
    cfg.decoder_hidden = cfg.model_width;
    cfg.decoder_layers = 2;
    cfg.max_prompt_tokens = 6;
    cfg.max_answer_tokens = 4;
    model::Model m(cfg, 1000 + seed);

    // Adapters on the decoder and gate with non-zero B, so their gradients are
    // exercised as well.
    const std::vector<std::string> groups = {std::string(model::kDecoder),
                                             std::string(model::kFusionGate)};
    model::lora_wrap(m, groups, {.rank = 2, .alpha = 4.0}, seed);
    std::normal_distribution<double> nb(0.0, 0.05);
    for (auto& [key, ad] : m.adapters())
      for (double& v : ad.b.mutable_data()) v = nb(rng);

    std::uniform_int_distribution<int> side(10, 40);
    auto tiles = std::make_shared<model::TileSet>(
        model::tile_image(noise_image(side(rng), side(rng), rng), cfg));
    const int n_tokens = tiles->grid.count() * cfg.patches_per_tile();
    if (n_tokens > 8) return {false, "image token count " + std::to_string(n_tokens) + " > 8"};

    std::uniform_int_distribution<int> letter('a', 'z');
    std::string prompt;
    for (int i = 0, len = std::uniform_int_distribution<int>(1, 6)(rng); i < len; ++i)
      prompt.push_back(static_cast<char>(letter(rng)));
    training::Example ex;
    ex.tiles = tiles;
    ex.question = m.vocab().encode_prompt(prompt);
    if (ex.question.size() > 6) return {false, "prompt longer than 6 tokens"};
    std::uniform_int_distribution<int> tok(0, static_cast<int>(m.vocab().size()) - 1);
    ex.answer = {tok(rng), tok(rng), m.vocab().eos()};

    auto loss = [&] { return training::example_loss(m, ex); };
    m.params().zero_grad();
    loss().backward();
    for (ParamGroup& g : m.params().groups()) {
      const auto numeric = finite_diff_grad([&] { return loss().item(); }, g, kEps);
      for (std::size_t i = 0; i < g.tensors().size(); ++i) {
        const Tensor& t = g.tensors()[i].tensor;
        std::vector<double> analytic(t.size(), 0.0);
        if (t.has_grad()) analytic.assign(t.grad().begin(), t.grad().end());
        const double e = max_relative_error(analytic, numeric[i], kFloor);
        checked += analytic.size();
        if (e > worst) {
          worst = e;
          worst_at = "seed " + std::to_string(seed) + " " + g.name() + "/" + g.tensors()[i].name;
        }
      }
    }
  }
  return {worst < 1e-4, fmt("max rel err %.3g", worst) + " at " + worst_at + ", " +
                            std::to_string(checked) + " scalars"};
}

Outcome ac2_fusion_gate() {
  auto rng = make_rng(2, "ac2");
  double worst_sum = 0.0;
  std::size_t shapes = 0, uniform_mismatch = 0;
  for (std::size_t n : {1, 3, 8, 16}) {
    for (std::size_t mq : {1, 2, 6}) {
      for (std::size_t d : {2, 8, 16}) {
        const double sd = 1.0 / std::sqrt(static_cast<double>(d));
        model::FusionGateParams p{randn(d, d, rng, sd), randn(d, d, rng, sd), randn(d, d, rng, sd),
                                  randn(d, d, rng, sd), randn(d, d, rng, sd), randn(d, d, rng, sd)};
        const Tensor aligned = randn(n, d, rng), question = randn(mq, d, rng);
        const Tensor modality = randn(3 * n, d, rng);
        const auto out = model::fusion_gate(aligned, question, modality, p);
        if (out.gating.rows() == n && out.gating.cols() == d && out.fused.rows() == n &&
            out.fused.cols() == d)
          ++shapes;

        // Attention weights of both stages.
        const double inv = 1.0 / std::sqrt(static_cast<double>(d));
        const Tensor w1 = softmax_rows(
            scale(matmul(matmul(aligned, p.wq_g), transpose(matmul(question, p.wk_g))), inv));
        const Tensor w2 = softmax_rows(scale(
            matmul(matmul(out.gating, p.wq_t), transpose(matmul(modality, p.wk_t))), inv));
        for (const Tensor* w : {&w1, &w2}) {
          for (std::size_t r = 0; r < w->rows(); ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < w->cols(); ++c) s += w->at(r, c);
            worst_sum = std::max(worst_sum, std::abs(s - 1.0));
          }
        }

        // Zero query weights give uniform attention: every output row is the
        // plain mean of the value rows.
        model::FusionGateParams z = p;
        z.wq_g = Tensor::zeros(d, d);
        z.wq_t = Tensor::zeros(d, d);
        const auto u = model::fusion_gate(aligned, question, modality, z);
        const Tensor vq = matmul(question, p.wv_g), vm = matmul(modality, p.wv_t);
        for (std::size_t c = 0; c < d; ++c) {
          double gq = 0.0, gm = 0.0;
          for (std::size_t j = 0; j < mq; ++j) gq += (1.0 / static_cast<double>(mq)) * vq.at(j, c);
          for (std::size_t j = 0; j < 3 * n; ++j) gm += (1.0 / static_cast<double>(3 * n)) * vm.at(j, c);
          for (std::size_t r = 0; r < n; ++r) {
            if (u.gating.at(r, c) != gq) ++uniform_mismatch;
            if (u.fused.at(r, c) != gm) ++uniform_mismatch;
          }
        }
      }
    }
  }
  const bool ok = shapes == 36 && worst_sum <= 1e-9 && uniform_mismatch == 0;
  return {ok, std::to_string(shapes) + "/36 shapes, " + fmt("max |row sum - 1| %.2g", worst_sum) +
                  ", " + std::to_string(uniform_mismatch) + " uniform-mean mismatches"};
}

// Trains Steps 1-4 on the desk set. Checks freezing after each step and keeps
// the held-out separation at init and after Step 3 for the separation check.
struct MtsResult {
  Outcome freezing;
  Outcome separation;
};

MtsResult run_mts() {
  const fs::path data = desk();
  const fs::path held = tmp("held-out");
  {
    cli::ForgeConfig fc;
    fc.screens = 12;
    fc.seed = 99;
    std::ostringstream log;
    cli::cmd_forge(fc, held, true, "", log);
  }
  const auto held_scenes = cli::load_scenes(held, 0);

  model::ModelConfig cfg;
  cfg.max_tiles = 2;
  model::Model m(cfg, 11);
  auto separation = [&] {
    const cli::EmbedRows rows = cli::export_embeddings(m, held_scenes);
    return eval::separation_score(rows.embeddings, rows.labels);
  };
  const double sep_init = separation();
  double sep_s3 = 0.0;

  std::string freeze_detail;
  bool freeze_ok = true;
  for (training::StepId id : {training::StepId::Step1, training::StepId::Step2,
                              training::StepId::Step3, training::StepId::Step4}) {
    training::StageConfig sc = training::stage_schedule(id);
    sc.max_tiles = cfg.max_tiles;
    sc.lr = 1e-3;
    sc.max_steps = 24;
    const std::string name(training::to_string(id));
    const auto samples = training::select_stage_samples(sc, data, 5);
    const auto examples = cli::make_examples(m, samples, data, sc.max_tiles);

    const std::set<std::string> unlocked(sc.unlocked.begin(), sc.unlocked.end());
    std::map<std::string, std::uint64_t> before;
    for (const auto& g : m.params().groups())
      if (!unlocked.count(g.name())) before[g.name()] = g.content_hash();
    std::map<std::string, std::uint64_t> unlocked_before;
    for (const auto& g : m.params().groups())
      if (unlocked.count(g.name())) unlocked_before[g.name()] = g.content_hash();

    training::run_stage(sc, examples, m, 5, {.merge = false});

    std::size_t frozen = 0, moved = 0;
    for (const auto& [gname, h] : before) {
      ++frozen;
      if (m.params().group(gname).content_hash() != h) {
        freeze_ok = false;
        freeze_detail += " step " + name + " changed " + gname + ";";
      }
    }
    for (const auto& [gname, h] : unlocked_before)
      if (m.params().group(gname).content_hash() != h) ++moved;
    if (moved != unlocked_before.size()) {
      freeze_ok = false;
      freeze_detail += " step " + name + " left an unlocked group untouched;";
    }
    freeze_detail += " S" + name + ": " + std::to_string(frozen) + " frozen, " +
                     std::to_string(moved) + " trained;";
    model::lora_merge(m);
    if (id == training::StepId::Step3) sep_s3 = separation();
  }
  MtsResult r;
  r.freezing = {freeze_ok, freeze_detail};
  r.separation = {sep_s3 > sep_init,
                  fmt("init %.4f", sep_init) + fmt(" -> after Step 3 %.4f", sep_s3)};
  return r;
}

Outcome ac4_lora() {
  model::ModelConfig cfg;
  cfg.max_tiles = 2;
  model::Model m(cfg, 41);
  auto rng = make_rng(4, "ac4");
  const model::TileSet ts = model::tile_image(noise_image(50, 37, rng), cfg);
  const std::vector<int> q = m.vocab().encode_prompt("where is the star icon");
  const std::vector<int> ans = m.vocab().encode_target("[1,2,3,4]");
  auto forward = [&] { return m.logits(m.encode_prefix(ts, q), ans); };

  const Tensor base = forward();
  std::vector<std::string> groups;
  for (const auto& g : m.params().group_names()) groups.push_back(g);
  model::LoraOptions opts{.rank = 4, .alpha = 8.0, .clamp_rank = true};
  const auto keys = model::lora_wrap(m, groups, opts, 3);
  const Tensor wrapped = forward();
  std::size_t differing = 0;
  for (std::size_t i = 0; i < base.size(); ++i) differing += base.data()[i] != wrapped.data()[i];

  std::normal_distribution<double> nb(0.0, 0.05);
  for (auto& [key, ad] : m.adapters())
    for (double& v : ad.b.mutable_data()) v = nb(rng);
  const Tensor active = forward();
  model::lora_merge(m);
  const Tensor merged = forward();
  double worst = 0.0, moved = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    worst = std::max(worst, std::abs(active.data()[i] - merged.data()[i]));
    moved = std::max(moved, std::abs(active.data()[i] - base.data()[i]));
  }
  const bool ok = !keys.empty() && differing == 0 && worst <= 1e-10 && moved > 1e-6 &&
                  m.adapters().empty();
  return {ok, std::to_string(keys.size()) + " adapters, " + std::to_string(differing) +
                  " logits differ after zero-init wrap, " +
                  fmt("merged max |diff| %.2g", worst)};
}

Outcome ac5_srp_audit(const std::vector<data::Scene>& scenes) {
  std::vector<data::Sample> samples;
  std::map<std::uint64_t, data::Scene> by_seed;
  const data::SrpConfig srp;
  for (const auto& s : scenes) {
    auto part = data::build_srp(s, srp, s.seed);
    samples.insert(samples.end(), part.begin(), part.end());
    by_seed.emplace(s.seed, s);
  }
  const cli::SrpAudit a = cli::audit_srp_samples(samples, by_seed);
  const bool ok = a.ok() && a.type_counts[2] > 0 && a.type_counts[0] > 0;
  return {ok, std::to_string(a.records) + " records, type 3 " + std::to_string(a.type_counts[2]) +
                  " with " + std::to_string(a.type3_violations) + " violations, type 1 " +
                  std::to_string(a.type_counts[0]) + " with " +
                  std::to_string(a.type1_not_one_hop) + " not one hop"};
}

Outcome ac6_small_objects(const std::vector<data::Scene>& scenes) {
  double max_ratio = 0.0;
  std::size_t small = 0, partition_errors = 0;
  for (const auto& s : scenes) {
    std::set<int> expected, got, general;
    std::map<int, BBox> boxes;
    for (const auto& r : s.flatten()) {
      if (r.node->kind != data::NodeKind::Icon) continue;
      const BBox& b = r.node->bbox;
      boxes[r.node->id] = b;
      // 100 * w*h / (W*H) <= 0.3 as integers
      if (1000LL * b.width() * b.height() <= 3LL * s.width * s.height) expected.insert(r.node->id);
    }
    for (const auto& smp : data::build_gad(s)) {
      const int id = smp.meta["nodes"][0].get<int>();
      if (smp.meta["subset"] == "small") {
        got.insert(id);
        const BBox& b = boxes.at(id);
        max_ratio = std::max(max_ratio, 100.0 * b.width() * b.height() / (1.0 * s.width * s.height));
      } else {
        general.insert(id);
      }
    }
    small += got.size();
    if (got != expected) ++partition_errors;
    for (const auto& [id, b] : boxes) partition_errors += general.count(id) == 0;
  }
  const double spot = data::small_object_ratio({0, 0, 30, 20}, 1000, 2000);
  const bool ok = max_ratio <= 0.3 && partition_errors == 0 && small > 0 &&
                  std::abs(spot - 0.03) < 1e-12;
  return {ok, std::to_string(small) + " small icons, " + fmt("max ratio %.4f%%", max_ratio) + ", " +
                  std::to_string(partition_errors) + " partition errors, " +
                  fmt("30x20 on 1000x2000 = %.4f%%", spot)};
}

Outcome ac7_metrics() {
  auto rng = make_rng(7, "ac7");
  std::uniform_int_distribution<int> coord(0, 60);
  auto random_box = [&] {
    int x0 = coord(rng), x1 = coord(rng), y0 = coord(rng), y1 = coord(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    return BBox{x0, y0, x1, y1};
  };
  double worst = 0.0;
  std::vector<eval::PredRecord> records;
  for (int i = 0; i < 10000; ++i) {
    const BBox a = random_box(), b = random_box();
    long long inter = 0, uni = 0;
    for (int y = 0; y < 60; ++y) {
      for (int x = 0; x < 60; ++x) {
        const bool ia = x >= a.x_left && x < a.x_right && y >= a.y_top && y < a.y_bottom;
        const bool ib = x >= b.x_left && x < b.x_right && y >= b.y_top && y < b.y_bottom;
        inter += ia && ib;
        uni += ia || ib;
      }
    }
    const double raster = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
    worst = std::max(worst, std::abs(eval::iou(a, b) - raster));
    if (i < 500) {
      eval::PredRecord r;
      r.id = std::to_string(i);
      r.task = "text2bbox";
      r.pred_box = a;
      r.prediction = format_box(a);
      r.gold_box = b;
      r.gold = format_box(b);
      records.push_back(r);
    }
  }
  bool monotone = true;
  double prev = 101.0;
  for (int k = 0; k <= 20; ++k) {
    const double acc = eval::acc_at_iou(records, k / 20.0);
    if (acc > prev) monotone = false;
    prev = acc;
  }
  const bool f1 = eval::token_f1("green icon", "icon") == 2.0 / 3.0;
  const bool rl = eval::rouge_l("a b c d", "a c d") == 6.0 / 7.0;
  const bool trivial = eval::token_f1("same words", "same words") == 1.0 &&
                       eval::token_f1("a b", "c d") == 0.0 && eval::rouge_l("x y", "x y") == 1.0 &&
                       eval::rouge_l("x", "") == 0.0;
  const bool ok = worst <= 1e-9 && monotone && f1 && rl && trivial;
  return {ok, fmt("max |iou - raster| %.2g", worst) + (monotone ? ", monotone" : ", NOT monotone") +
                  (f1 ? ", f1 2/3" : ", f1 wrong") + (rl ? ", rouge 6/7" : ", rouge wrong")};
}

Outcome ac8_overfit() {
  // Step budget of the overfit run: per-stage optimizer steps at batch 8.
  constexpr std::size_t kSteps[4] = {300, 100, 100, 1500};
  constexpr double kLr = 3e-3;
  const fs::path data = desk();
  std::vector<data::Sample> train;
  for (auto& s : data::load_jsonl(data / "tad.jsonl"))
    if (s.task == data::kTaskText2Bbox && train.size() < 64) train.push_back(s);
  if (train.size() < 64) return {false, "desk set has fewer than 64 text2bbox samples"};

  model::ModelConfig cfg;
  cfg.max_tiles = 1;
  model::Model m(cfg, 1);
  const auto examples = cli::make_examples(m, train, data, cfg.max_tiles);
  int k = 0;
  double final_loss = 0.0;
  for (training::StepId id : {training::StepId::Step1, training::StepId::Step2,
                              training::StepId::Step3, training::StepId::Step4}) {
    training::StageConfig sc = training::stage_schedule(id);
    sc.datasets = {{"TAD", {"text2bbox"}, 64}};
    sc.lr = kLr;
    sc.batch = 8;
    sc.max_tiles = cfg.max_tiles;
    sc.max_steps = kSteps[k++];
    const auto log = training::run_stage(sc, examples, m, 1);
    final_loss = log.stages.back().final_loss;
  }
  const auto records = cli::predict(m, train, data, cfg.max_tiles);
  const double acc = eval::acc_at_iou(records, 0.5);
  std::size_t exact = 0;
  for (const auto& r : records) exact += r.prediction == r.gold;
  return {acc >= 90.0, fmt("Acc@IoU=0.5 %.1f%%", acc) + ", " + std::to_string(exact) +
                           "/64 exact strings" + fmt(", final loss %.4f", final_loss)};
}

Outcome ac10_determinism() {
  std::ostringstream log;
  const fs::path fdir = tmp("det-forge");
  cli::ForgeConfig fc;
  fc.screens = 6;
  fc.seed = 21;
  cli::cmd_forge(fc, fdir, true, "", log);
  const std::string forge1 = slurp(fdir / "manifest.json");
  cli::cmd_forge(fc, fdir, true, "", log);
  const std::string forge2 = slurp(fdir / "manifest.json");

  const cli::TrainConfig tc = cli::train_config_from_json(
      {{"model",
        {{"tile_side", 14}, {"patch_side", 7}, {"max_tiles", 1}, {"feature_width", 8},
         {"model_width", 8}, {"decoder_hidden", 16}, {"decoder_layers", 1}}},
       {"seed", 4},
       {"stages", {"1", "2", "3", "4"}},
       {"defaults", {{"budget", 6}, {"max_steps", 3}, {"max_tiles", 1}, {"batch", 2}, {"lr", 1e-3}}}});
  cli::TrainOptions to;
  to.data_dir = fdir;
  to.out = tmp("det-train");
  to.force = true;
  cli::cmd_train(tc, to, log);
  const std::string train1 = slurp(to.out / "manifest.json");
  cli::cmd_train(tc, to, log);
  const std::string train2 = slurp(to.out / "manifest.json");

  const bool ok = !forge1.empty() && forge1 == forge2 && !train1.empty() && train1 == train2;
  return {ok, std::string("forge manifest ") + (forge1 == forge2 ? "identical" : "differs") +
                  ", train manifest " + (train1 == train2 ? "identical" : "differs")};
}

}  // namespace

// With arguments, only the named criteria run (e.g. `acceptance AC1 AC7`).
int main(int argc, char** argv) {
  const std::set<std::string> only(argv + 1, argv + argc);
  auto wanted = [&](const char* id) { return only.empty() || only.count(id) > 0; };
  int failures = 0;
  auto report = [&](const char* id, const char* what, const std::function<Outcome()>& fn,
                    double budget_s) {
    if (!wanted(id)) return;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double t = seconds_since(t0);
    if (budget_s > 0 && t > budget_s) {
      o.pass = false;
      o.detail += fmt(", over the %.0fs budget", budget_s);
    }
    failures += !o.pass;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << what << ": " << o.detail
              << fmt(" [%.1fs]", t) << std::endl;
  };

  report("AC1", "gradient fidelity", ac1_gradients, 120);
  report("AC2", "fusion gate contract", ac2_fusion_gate, 0);

  MtsResult mts;
  const auto t_mts = Clock::now();
  if (wanted("AC3") || wanted("AC9")) {
    try {
      mts = run_mts();
    } catch (const std::exception& e) {
      mts.freezing = mts.separation = {false, std::string("threw: ") + e.what()};
    }
  }
  const double mts_s = seconds_since(t_mts);
  report("AC3", "MTS freezing", [&] {
    Outcome o = mts.freezing;
    if (mts_s > 900) o = {false, o.detail + " over the 900s budget"};
    return o;
  }, 0);
  if (wanted("AC3")) std::cout << "    (Steps 1-4 took " << fmt("%.1fs", mts_s) << ")" << std::endl;

  report("AC4", "LoRA identities", ac4_lora, 0);

  std::vector<data::Scene> scenes;
  const auto t_gen = Clock::now();
  if (wanted("AC5") || wanted("AC6"))
    for (int i = 0; i < 1000; ++i) scenes.push_back(data::gen_screen(cli::scene_seed(2026, i), {}));
  const double gen_s = seconds_since(t_gen);
  report("AC5", "SRP audit", [&] { return ac5_srp_audit(scenes); }, 60 - gen_s);
  report("AC6", "small-object filter", [&] { return ac6_small_objects(scenes); }, 0);
  report("AC7", "metric oracles", ac7_metrics, 0);
  report("AC8", "end-to-end overfit", ac8_overfit, 600);
  report("AC9", "perceiver separation", [&] { return mts.separation; }, 0);
  report("AC10", "determinism", ac10_determinism, 0);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
