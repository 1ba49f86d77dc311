// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/training/stage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "mpgui/errors.hpp"
#include "mpgui/model/model.hpp"

namespace mpgui::training {

namespace {

const std::vector<std::string>& known_groups() {
  static const std::vector<std::string> groups = [] {
    std::vector<std::string> g;
    for (auto name : {model::kBackbone, model::kAlign, model::kTextual, model::kGraphical,
                      model::kSpatial, model::kFusionGate, model::kDecoder}) {
      g.emplace_back(name);
      g.push_back(model::lora_group(name));
    }
    return g;
  }();
  return groups;
}

const std::set<std::string>& known_datasets() {
  static const std::set<std::string> d = {"TAD", "GAD", "SAD", "SynD"};
  return d;
}

std::string g(std::string_view s) { return std::string(s); }

}  // namespace

std::string_view to_string(StepId id) {
  switch (id) {
    case StepId::Step1: return "1";
    case StepId::Step2: return "2";
    case StepId::Step3: return "3";
    case StepId::Step4: return "4";
    case StepId::Mft: return "MFT";
  }
  return "?";
}

StepId parse_step(std::string_view s) {
  if (s == "1" || s == "step1") return StepId::Step1;
  if (s == "2" || s == "step2") return StepId::Step2;
  if (s == "3" || s == "step3") return StepId::Step3;
  if (s == "4" || s == "step4") return StepId::Step4;
  if (s == "MFT" || s == "mft") return StepId::Mft;
  throw ConfigError("unknown step id '" + std::string(s) + "'");
}

std::vector<StepId> all_steps() {
  return {StepId::Step1, StepId::Step2, StepId::Step3, StepId::Step4, StepId::Mft};
}

void StageConfig::validate() const {
  const std::string where = "stage " + std::string(to_string(step)) + ": ";
  if (datasets.empty()) throw ConfigError(where + "no datasets");
  for (const auto& d : datasets) {
    if (!known_datasets().contains(d.dataset)) {
      throw ConfigError(where + "unknown dataset '" + d.dataset + "'");
    }
    if (d.tasks.empty()) throw ConfigError(where + "dataset " + d.dataset + " lists no tasks");
    if (d.budget < 1) throw ConfigError(where + "sample budget must be >= 1");
  }
  if (unlocked.empty()) throw ConfigError(where + "nothing unlocked");
  for (const auto& u : unlocked) {
    if (std::find(known_groups().begin(), known_groups().end(), u) == known_groups().end()) {
      throw ConfigError(where + "unknown parameter group '" + u + "'");
    }
  }
  if (lora) {
    if (lora->rank < 1) throw ConfigError(where + "LoRA rank must be >= 1");
    for (const auto& t : lora->targets) {
      if (std::find(unlocked.begin(), unlocked.end(), model::lora_group(t)) == unlocked.end()) {
        throw ConfigError(where + "LoRA target " + t + " is not unlocked as " +
                          model::lora_group(t));
      }
    }
  }
  for (const auto& u : unlocked) {
    if (u.ends_with(".lora")) {
      const std::string base = u.substr(0, u.size() - 5);
      if (!lora || std::find(lora->targets.begin(), lora->targets.end(), base) ==
                       lora->targets.end()) {
        throw ConfigError(where + u + " unlocked without a LoRA target");
      }
    }
  }
  // A zero rate is accepted so a stage can be run as a pure no-op check.
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError(where + "lr must be >= 0");
  if (warmup_ratio < 0.0 || warmup_ratio > 1.0) throw ConfigError(where + "warmup_ratio out of [0,1]");
  if (weight_decay < 0.0) throw ConfigError(where + "weight_decay must be >= 0");
  if (epochs < 1 || batch < 1 || max_tiles < 1) {
    throw ConfigError(where + "epochs, batch and max_tiles must be >= 1");
  }
  if (!(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1 && adam.eps > 0)) {
    throw ConfigError(where + "invalid Adam hyperparameters");
  }
}

std::vector<std::string> StageConfig::task_tags() const {
  std::vector<std::string> out;
  for (const auto& d : datasets) {
    for (const auto& t : d.tasks) {
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
  }
  return out;
}

StageConfig stage_schedule(StepId id) {
  using model::lora_group;
  StageConfig c;
  c.step = id;
  const LoraSpec small{8, 16.0, {g(model::kDecoder)}};
  const LoraSpec large{64, 128.0, {g(model::kDecoder), g(model::kBackbone)}};
  const std::vector<std::string> tgs_pfm = {g(model::kTextual), g(model::kGraphical),
                                            g(model::kSpatial), g(model::kFusionGate)};
  switch (id) {
    case StepId::Step1:
      c.datasets = {{"TAD", {"text2bbox", "bbox2text"}, 256}};
      c.unlocked = {g(model::kTextual), lora_group(model::kDecoder)};
      c.lora = small;
      c.reference_budget = {160000};
      c.reference_samples = 160031;
      break;
    case StepId::Step2:
      c.datasets = {{"GAD", {"text2bbox", "bbox2text"}, 256}};
      c.unlocked = {g(model::kGraphical), lora_group(model::kDecoder)};
      c.lora = small;
      c.reference_budget = {187000};
      c.reference_samples = 187657;
      break;
    case StepId::Step3:
      c.datasets = {{"SAD", {"SRP"}, 256}};
      c.unlocked = {g(model::kSpatial), lora_group(model::kDecoder)};
      c.lora = small;
      c.reference_budget = {200000};
      c.reference_samples = 200000;
      break;
    case StepId::Step4:
    case StepId::Mft:
      c.datasets = {{"TAD", {"text2bbox"}, 48},
                    {"GAD", {"bbox2text"}, 48},
                    {"SAD", {"SRP"}, 48},
                    {"SynD", {"SPE-QA"}, 64},
                    {"SynD", {"MPE-QA", "local-desc"}, 64}};
      c.unlocked = tgs_pfm;
      c.unlocked.push_back(g(model::kAlign));
      c.unlocked.push_back(lora_group(model::kDecoder));
      c.unlocked.push_back(lora_group(model::kBackbone));
      c.lora = large;
      if (id == StepId::Step4) {
        c.reference_budget = {35000, 48000};
        c.reference_samples = 93419;
      } else {
        c.lr = 4e-5;
        c.max_tiles = 4;
        c.reference_budget = {};
        c.reference_samples = 107373;
      }
      break;
  }
  return c;
}

std::size_t reference_budget_sum() {
  std::size_t s = 0;
  for (StepId id : {StepId::Step1, StepId::Step2, StepId::Step3, StepId::Step4}) {
    for (std::size_t b : stage_schedule(id).reference_budget) s += b;
  }
  return s;
}

void apply_alternate_lr(StageConfig& cfg) {
  switch (cfg.step) {
    case StepId::Step1:
    case StepId::Step2:
    case StepId::Step3: cfg.lr = 1e-5; break;
    case StepId::Step4: cfg.lr = 5e-6; break;
    case StepId::Mft: cfg.lr = 5e-4; break;
  }
}

StageConfig navigation_preset() {
  StageConfig c = stage_schedule(StepId::Mft);
  c.lora->rank = 128;
  c.lora->alpha = 256.0;
  c.lr = 2e-5;
  c.epochs = 3;
  return c;
}

nlohmann::json to_json(const StageConfig& c) {
  nlohmann::json ds = nlohmann::json::array();
  for (const auto& d : c.datasets) {
    ds.push_back({{"dataset", d.dataset}, {"tasks", d.tasks}, {"budget", d.budget}});
  }
  nlohmann::json j = {{"step", std::string(to_string(c.step))},
                      {"datasets", ds},
                      {"unlocked", c.unlocked},
                      {"lr", c.lr},
                      {"warmup_ratio", c.warmup_ratio},
                      {"weight_decay", c.weight_decay},
                      {"epochs", c.epochs},
                      {"batch", c.batch},
                      {"max_tiles", c.max_tiles},
                      {"max_steps", c.max_steps},
                      {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
                      {"reference_budget", c.reference_budget},
                      {"reference_samples", c.reference_samples}};
  if (c.lora) {
    j["lora"] = {{"rank", c.lora->rank}, {"alpha", c.lora->alpha}, {"targets", c.lora->targets}};
  } else {
    j["lora"] = nullptr;
  }
  return j;
}

StageConfig apply_overrides(StageConfig c, const nlohmann::json& j) {
  try {
    if (j.contains("datasets")) {
      c.datasets.clear();
      for (const auto& d : j.at("datasets")) {
        c.datasets.push_back({d.at("dataset").get<std::string>(),
                              d.at("tasks").get<std::vector<std::string>>(),
                              d.at("budget").get<std::size_t>()});
      }
    }
    if (j.contains("budget")) {
      // Shorthand: one budget for every dataset row.
      for (auto& d : c.datasets) d.budget = j.at("budget").get<std::size_t>();
    }
    if (j.contains("unlocked")) c.unlocked = j.at("unlocked").get<std::vector<std::string>>();
    if (j.contains("lora")) {
      const auto& l = j.at("lora");
      if (l.is_null()) {
        c.lora.reset();
      } else {
        LoraSpec s = c.lora.value_or(LoraSpec{});
        if (l.contains("rank")) s.rank = l.at("rank").get<int>();
        if (l.contains("alpha")) s.alpha = l.at("alpha").get<double>();
        if (l.contains("targets")) s.targets = l.at("targets").get<std::vector<std::string>>();
        c.lora = s;
      }
    }
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("warmup_ratio")) c.warmup_ratio = j.at("warmup_ratio").get<double>();
    if (j.contains("weight_decay")) c.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
    if (j.contains("batch")) c.batch = j.at("batch").get<int>();
    if (j.contains("max_tiles")) c.max_tiles = j.at("max_tiles").get<int>();
    if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<std::size_t>();
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      if (a.contains("beta1")) c.adam.beta1 = a.at("beta1").get<double>();
      if (a.contains("beta2")) c.adam.beta2 = a.at("beta2").get<double>();
      if (a.contains("eps")) c.adam.eps = a.at("eps").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("stage " + std::string(to_string(c.step)) + " override: " + e.what());
  }
  c.validate();
  return c;
}

std::size_t warmup_steps(std::size_t total_steps, double warmup_ratio) {
  return static_cast<std::size_t>(std::ceil(warmup_ratio * static_cast<double>(total_steps)));
}

double lr_schedule(std::size_t step, std::size_t total, double base_lr, double warmup_ratio) {
  if (total == 0) throw ConfigError("lr_schedule: total_steps is 0");
  if (step >= total) {
    throw ContractError("lr_schedule: step " + std::to_string(step) + " outside [0, " +
                        std::to_string(total) + ")");
  }
  const std::size_t w = warmup_steps(total, warmup_ratio);
  if (step < w) return base_lr * static_cast<double>(step) / static_cast<double>(w);
  const double t = static_cast<double>(step - w) / static_cast<double>(total - w);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace mpgui::training
