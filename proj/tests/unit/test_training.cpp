// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mpgui/data/datasets.hpp"
#include "mpgui/errors.hpp"
#include "mpgui/model/model.hpp"
#include "mpgui/training/optim.hpp"
#include "mpgui/training/stage.hpp"
#include "mpgui/training/trainer.hpp"

using namespace mpgui;
using namespace mpgui::training;

namespace {

model::ModelConfig tiny_config() {
  model::ModelConfig c;
  c.tile_side = 14;
  c.patch_side = 7;
  c.max_tiles = 1;
  c.feature_width = 8;
  c.model_width = 8;
  c.decoder_hidden = 16;
  c.decoder_layers = 1;
  return c;
}

std::vector<Example> tad_examples(const model::Model& m, std::size_t limit) {
  std::vector<Example> out;
  for (std::uint64_t seed = 1; out.size() < limit; ++seed) {
    const data::Scene s = data::gen_screen(seed, data::GenConfig{});
    for (const auto& smp : data::build_tad(s)) {
      if (smp.task != data::kTaskText2Bbox || out.size() >= limit) continue;
      out.push_back(make_example(m, smp, s.raster, 1));
    }
  }
  return out;
}

StageConfig tiny_stage() {
  StageConfig c;
  c.step = StepId::Step1;
  c.datasets = {{"TAD", {"text2bbox"}, 4}};
  c.unlocked = {"TxP", "decoder.lora"};
  c.lora = LoraSpec{2, 4.0, {"decoder"}};
  c.lr = 5e-3;
  c.batch = 2;
  c.max_steps = 6;
  return c;
}

}  // namespace

TEST_CASE("learning-rate schedule: linear warmup then cosine") {
  const std::size_t total = 100;
  const double base = 2e-3;
  CHECK(warmup_steps(total, 0.03) == 3);
  CHECK(warmup_steps(101, 0.03) == 4);
  CHECK(lr_schedule(0, total, base, 0.03) == 0.0);
  CHECK(lr_schedule(1, total, base, 0.03) == doctest::Approx(base / 3));
  CHECK(lr_schedule(3, total, base, 0.03) == doctest::Approx(base));
  for (std::size_t s = 3; s < total; ++s) {
    const double t = static_cast<double>(s - 3) / 97.0;
    CHECK(lr_schedule(s, total, base, 0.03) ==
          doctest::Approx(base * 0.5 * (1 + std::cos(std::numbers::pi * t))));
    if (s > 3) CHECK(lr_schedule(s, total, base, 0.03) < lr_schedule(s - 1, total, base, 0.03));
  }
  CHECK(lr_schedule(0, 10, base, 0.0) == base);
  CHECK_THROWS_AS(lr_schedule(0, 0, base, 0.03), ConfigError);
  CHECK_THROWS_AS(lr_schedule(100, total, base, 0.03), ContractError);
}

TEST_CASE("AdamW steps match the closed-form update") {
  AdamConfig ac;
  AdamW opt(ac, 0.1);
  Tensor w = Tensor::from(1, 2, {1.0, -2.0}, true);
  Tensor b = Tensor::from(1, 1, {0.5}, true);
  opt.track(w, true);
  opt.track(b, false);
  double m[3] = {0, 0, 0}, v[3] = {0, 0, 0};
  double x[3] = {1.0, -2.0, 0.5};
  const double lr = 0.01;
  for (int t = 1; t <= 4; ++t) {
    opt.zero_grad();
    add(sum(square(w)), sum(scale(b, 3.0))).backward();
    const double g[3] = {2 * x[0], 2 * x[1], 3.0};
    opt.step(lr);
    for (int i = 0; i < 3; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(0.9, t));
      const double vh = v[i] / (1 - std::pow(0.999, t));
      const double wd = i < 2 ? 0.1 : 0.0;
      x[i] -= lr * (mh / (std::sqrt(vh) + 1e-8) + wd * x[i]);
    }
    CHECK(w.data()[0] == doctest::Approx(x[0]).epsilon(1e-13));
    CHECK(w.data()[1] == doctest::Approx(x[1]).epsilon(1e-13));
    CHECK(b.data()[0] == doctest::Approx(x[2]).epsilon(1e-13));
  }
  CHECK(opt.steps_taken() == 4);
}

TEST_CASE("AdamW with zero learning rate leaves bytes untouched") {
  AdamW opt(AdamConfig{}, 0.01);
  Tensor w = Tensor::from(1, 2, {0.1, 0.2}, true);
  opt.track(w, true);
  sum(square(w)).backward();
  opt.step(0.0);
  CHECK(w.data()[0] == 0.1);
  CHECK(w.data()[1] == 0.2);
}

TEST_CASE("AdamW rejects non-finite gradients") {
  AdamW opt(AdamConfig{}, 0.0);
  Tensor w = Tensor::from(1, 1, {1.0}, true);
  opt.track(w, true);
  w.zero_grad();
  w.mutable_grad()[0] = NAN;
  CHECK_THROWS_AS(opt.step(0.1), NumericError);
}

TEST_CASE("masked loss averages the selected rows") {
  const Tensor lg = Tensor::from(3, 2, {0.0, 1.0, 2.0, 0.0, 5.0, 5.0});
  const std::vector<int> t = {1, 0, 0};
  const bool mask[3] = {true, false, true};
  const double row0 = -std::log(std::exp(1.0) / (1 + std::exp(1.0)));
  const double row2 = std::log(2.0);
  CHECK(masked_loss(lg, t, mask).item() == doctest::Approx((row0 + row2) / 2));
  const bool none[3] = {false, false, false};
  CHECK_THROWS_AS(masked_loss(lg, t, none), ContractError);
}

TEST_CASE("stage schedule matches the recipe") {
  CHECK(reference_budget_sum() == 630000);
  CHECK(kReferenceReportedTotal == 680000);
  for (StepId id : all_steps()) {
    const StageConfig c = stage_schedule(id);
    CHECK_NOTHROW(c.validate());
    CHECK(parse_step(to_string(id)) == id);
    CHECK(c.lr == (id == StepId::Mft ? 4e-5 : 1e-5));
    CHECK(c.warmup_ratio == 0.03);
    CHECK(c.weight_decay == 0.01);
    CHECK(c.epochs == 1);
  }
  const auto s1 = stage_schedule(StepId::Step1);
  CHECK(s1.unlocked == std::vector<std::string>{"TxP", "decoder.lora"});
  CHECK(s1.lora->rank == 8);
  CHECK(s1.lora->alpha == 16.0);
  CHECK(stage_schedule(StepId::Step2).unlocked[0] == "GaP");
  CHECK(stage_schedule(StepId::Step3).task_tags() == std::vector<std::string>{"SRP"});
  const auto s4 = stage_schedule(StepId::Step4);
  CHECK(s4.lora->rank == 64);
  CHECK(s4.lora->alpha == 128.0);
  CHECK(s4.lora->targets.size() == 2);
  CHECK(stage_schedule(StepId::Mft).max_tiles == 4);
  CHECK_THROWS_AS(parse_step("5"), ConfigError);

  StageConfig lrs = s4;
  apply_alternate_lr(lrs);
  CHECK(lrs.lr == 5e-6);
  const StageConfig nav = navigation_preset();
  CHECK(nav.lora->rank == 128);
  CHECK(nav.lr == 2e-5);
  CHECK(nav.epochs == 3);
}

TEST_CASE("stage validation") {
  StageConfig c = tiny_stage();
  CHECK_NOTHROW(c.validate());
  c.datasets[0].dataset = "XYZ";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny_stage();
  c.unlocked = {"TxP"};  // adapter group not trainable
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny_stage();
  c.lr = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = tiny_stage();
  c.lr = 0.0;
  CHECK_NOTHROW(c.validate());
  c = tiny_stage();
  c.unlocked.push_back("nonsense");
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("overrides overlay only the given keys") {
  const StageConfig base = stage_schedule(StepId::Step2);
  const StageConfig o = apply_overrides(base, {{"lr", 1e-3}, {"budget", 10}, {"batch", 4}});
  CHECK(o.lr == 1e-3);
  CHECK(o.batch == 4);
  for (const auto& d : o.datasets) CHECK(d.budget == 10);
  CHECK(o.unlocked == base.unlocked);
  CHECK(to_json(apply_overrides(base, nlohmann::json::object())) == to_json(base));
}

TEST_CASE("examples end with eos and the loss is teacher forced") {
  const model::Model m(tiny_config(), 5);
  const auto exs = tad_examples(m, 1);
  const Example& ex = exs[0];
  CHECK(ex.answer.back() == m.vocab().eos());
  CHECK(ex.tiles->tiles.size() == 1);

  const model::Prefix p = m.encode_prefix(*ex.tiles, ex.question);
  const Tensor lg = m.logits(p, std::span<const int>(ex.answer).first(ex.answer.size() - 1));
  double total = 0.0;
  for (std::size_t i = 0; i < ex.answer.size(); ++i) {
    const std::size_t row = p.length() - 1 + i;
    double mx = -INFINITY;
    for (std::size_t c = 0; c < lg.cols(); ++c) mx = std::max(mx, lg.at(row, c));
    double z = 0.0;
    for (std::size_t c = 0; c < lg.cols(); ++c) z += std::exp(lg.at(row, c) - mx);
    total += mx + std::log(z) - lg.at(row, ex.answer[i]);
  }
  CHECK(example_loss(m, ex).item() == doctest::Approx(total / ex.answer.size()).epsilon(1e-12));

  model::ModelConfig shortc = tiny_config();
  shortc.max_answer_tokens = 4;
  const model::Model ms(shortc, 5);
  const data::Scene s = data::gen_screen(1, data::GenConfig{});
  const auto tad = data::build_tad(s);
  CHECK_THROWS_AS(make_example(ms, tad[0], s.raster, 1), LengthError);
}

TEST_CASE("a stage trains only unlocked groups and merges its adapters") {
  model::Model m(tiny_config(), 8);
  const auto exs = tad_examples(m, 4);
  const auto before = m.params().hashes();
  const TrainLog log = run_stage(tiny_stage(), exs, m, 3);
  REQUIRE(log.stages.size() == 1);
  const StageRecord& r = log.stages[0];
  CHECK(r.frozen_ok());
  CHECK(r.steps == 6);
  CHECK(log.steps.size() == 6);
  CHECK(r.frozen_before.count("decoder") == 1);
  CHECK(r.frozen_before.count("TxP") == 0);
  CHECK_FALSE(m.params().has_group("decoder.lora"));
  CHECK(m.adapters().empty());
  const auto after = m.params().hashes();
  CHECK(after.at("TxP") != before.at("TxP"));
  CHECK(after.at("decoder") != before.at("decoder"));  // merged delta
  for (const char* g : {"backbone", "align", "GaP", "SaP", "FG"}) CHECK(after.at(g) == before.at(g));
  for (const auto& g : m.params().groups())
    for (const auto& nt : g.tensors()) CHECK(nt.tensor.requires_grad());
}

TEST_CASE("stage runs are deterministic and can keep adapters") {
  model::Model a(tiny_config(), 8), b(tiny_config(), 8);
  const auto exs = tad_examples(a, 4);
  const TrainLog la = run_stage(tiny_stage(), exs, a, 3, {.merge = false});
  const TrainLog lb = run_stage(tiny_stage(), exs, b, 3, {.merge = false});
  CHECK(a.params().hashes() == b.params().hashes());
  CHECK(la.to_jsonl() == lb.to_jsonl());
  CHECK(a.params().has_group("decoder.lora"));
  CHECK(a.params().hashes().at("decoder") == model::Model(tiny_config(), 8).params().hashes().at("decoder"));
}

TEST_CASE("repeated steps on one batch reduce the loss") {
  model::Model m(tiny_config(), 2);
  const auto exs = tad_examples(m, 2);
  StageConfig c = tiny_stage();
  c.unlocked = {"TxP", "FG", "align", "decoder.lora"};
  c.lr = 1e-2;
  c.max_steps = 40;
  const TrainLog log = run_stage(c, exs, m, 1);
  CHECK(log.steps.back().loss < 0.75 * log.steps.front().loss);
}

TEST_CASE("stage preconditions") {
  model::Model m(tiny_config(), 8);
  const auto exs = tad_examples(m, 2);
  StageConfig c = tiny_stage();
  c.datasets = {{"SAD", {"SRP"}, 4}};
  CHECK_THROWS_AS(run_stage(c, exs, m, 1), ConfigError);
  CHECK_THROWS_AS(run_stage(tiny_stage(), std::span<const Example>{}, m, 1), ContractError);
}
