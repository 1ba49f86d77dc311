// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <set>

#include "mpgui/data/templates.hpp"
#include "mpgui/errors.hpp"
#include "mpgui/model/tiling.hpp"
#include "mpgui/rng.hpp"
#include "mpgui/training/optim.hpp"

namespace mpgui::training {

const GrayImage& ImageCache::get(const std::string& ref) {
  auto it = images_.find(ref);
  if (it != images_.end()) return it->second;
  return images_.emplace(ref, read_pgm(root_ / ref)).first->second;
}

Example make_example(const model::Model& model, const data::Sample& sample,
                     const GrayImage& image, int max_tiles) {
  model::ModelConfig cfg = model.config();
  cfg.max_tiles = std::min(cfg.max_tiles, max_tiles);
  Example ex;
  ex.id = data::sample_id(sample);
  ex.task = sample.task;
  ex.tiles = std::make_shared<const model::TileSet>(model::tile_image(image, cfg));
  ex.question = model.vocab().encode_prompt(data::question_text(sample.prompt));
  ex.answer = model.vocab().encode_target(sample.target);
  ex.answer.push_back(model.vocab().eos());
  if (ex.answer.size() > static_cast<std::size_t>(model.config().max_answer_tokens)) {
    throw LengthError("sample " + ex.id + ": answer has " + std::to_string(ex.answer.size()) +
                      " tokens, maximum is " + std::to_string(model.config().max_answer_tokens));
  }
  return ex;
}

Tensor example_loss(const model::Model& model, const Example& ex) {
  const model::Prefix prefix = model.encode_prefix(*ex.tiles, ex.question);
  const std::span<const int> fed(ex.answer.data(), ex.answer.size() - 1);
  const Tensor lg = model.logits(prefix, fed);
  const std::size_t p = prefix.length();
  std::vector<int> targets(lg.rows(), -1);
  auto mask = std::make_unique<bool[]>(lg.rows());
  for (std::size_t i = 0; i < ex.answer.size(); ++i) {
    targets[p - 1 + i] = ex.answer[i];
    mask[p - 1 + i] = true;
  }
  return masked_loss(lg, targets, std::span<const bool>(mask.get(), lg.rows()));
}

std::vector<std::string> dataset_files(const std::string& dataset) {
  if (dataset == "TAD") return {"tad.jsonl"};
  if (dataset == "GAD") return {"gad.jsonl"};
  if (dataset == "SAD") return {"srp.jsonl"};
  if (dataset == "SynD") return {"spe.jsonl", "mpe.jsonl"};
  throw ConfigError("unknown dataset '" + dataset + "'");
}

std::vector<data::Sample> select_stage_samples(const StageConfig& cfg,
                                               const std::filesystem::path& data_dir,
                                               std::uint64_t seed) {
  const std::string stage(to_string(cfg.step));
  std::vector<data::Sample> out;
  std::size_t row = 0;
  for (const auto& d : cfg.datasets) {
    std::vector<data::Sample> pool;
    for (const auto& f : dataset_files(d.dataset)) {
      const auto path = data_dir / f;
      if (!std::filesystem::exists(path)) {
        throw ConfigError("stage " + stage + ": missing dataset " + d.dataset + " (" +
                          path.string() + ")");
      }
      for (auto& s : data::load_jsonl(path)) {
        if (std::find(d.tasks.begin(), d.tasks.end(), s.task) != d.tasks.end()) {
          pool.push_back(std::move(s));
        }
      }
    }
    if (pool.empty()) {
      throw ConfigError("stage " + stage + ": dataset " + d.dataset + " has no samples for the " +
                        "configured tasks");
    }
    auto rng = make_rng(seed, "select/" + stage + "/" + std::to_string(row++));
    std::shuffle(pool.begin(), pool.end(), rng);
    if (pool.size() > d.budget) pool.resize(d.budget);
    for (auto& s : pool) out.push_back(std::move(s));
  }
  return out;
}

void TrainLog::append(const TrainLog& other) {
  steps.insert(steps.end(), other.steps.begin(), other.steps.end());
  stages.insert(stages.end(), other.stages.begin(), other.stages.end());
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  for (const auto& s : steps) {
    out += nlohmann::json{{"stage", s.stage}, {"step", s.step}, {"lr", s.lr}, {"loss", s.loss}}
               .dump();
    out += '\n';
  }
  return out;
}

TrainLog run_stage(const StageConfig& cfg, std::span<const Example> data, model::Model& model,
                   std::uint64_t seed, const RunOptions& opts) {
  cfg.validate();
  const std::string stage(to_string(cfg.step));
  if (data.empty()) throw ContractError("stage " + stage + ": no training data");
  const auto tasks = cfg.task_tags();
  for (const auto& ex : data) {
    if (std::find(tasks.begin(), tasks.end(), ex.task) == tasks.end()) {
      throw ConfigError("stage " + stage + ": task " + ex.task + " is not part of this stage");
    }
  }
  auto& store = model.params();
  for (const auto& u : cfg.unlocked) {
    const bool adapter = u.ends_with(".lora");
    if (!adapter && !store.has_group(u)) {
      throw ConfigError("stage " + stage + ": model has no group " + u);
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  StageRecord rec;
  rec.stage = stage;
  rec.examples = data.size();
  if (cfg.lora) {
    model::LoraOptions lo;
    lo.rank = cfg.lora->rank;
    lo.alpha = cfg.lora->alpha;
    lo.clamp_rank = true;
    rec.lora_keys = model::lora_wrap(model, cfg.lora->targets, lo,
                                     derive_seed(seed, "lora/stage" + stage));
  }

  const std::set<std::string> unlocked(cfg.unlocked.begin(), cfg.unlocked.end());
  std::map<const Node*, bool> saved;
  AdamW opt(cfg.adam, cfg.weight_decay);
  for (auto& g : store.groups()) {
    const bool on = unlocked.contains(g.name());
    if (!on) rec.frozen_before[g.name()] = g.content_hash();
    for (auto& nt : g.tensors()) {
      saved[nt.tensor.node()] = nt.tensor.requires_grad();
      nt.tensor.set_requires_grad(on);
      if (on) opt.track(nt.tensor, nt.kind != ParamKind::Bias);
    }
  }

  const std::size_t batch = static_cast<std::size_t>(cfg.batch);
  const std::size_t per_epoch = (data.size() + batch - 1) / batch;
  const std::size_t total =
      cfg.max_steps > 0 ? cfg.max_steps : per_epoch * static_cast<std::size_t>(cfg.epochs);

  TrainLog log;
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  std::size_t epoch = 0;
  std::vector<std::size_t> picked;
  for (std::size_t step = 0; step < total; ++step) {
    const double lr = lr_schedule(step, total, cfg.lr, cfg.warmup_ratio);
    picked.clear();
    // A batch never straddles an epoch boundary.
    while (picked.size() < batch) {
      if (cursor == order.size()) {
        if (!picked.empty()) break;
        order.resize(data.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        auto rng = make_rng(seed, "order/" + stage + "/" + std::to_string(epoch++));
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      picked.push_back(order[cursor++]);
    }
    opt.zero_grad();
    double loss_sum = 0.0;
    const double w = 1.0 / static_cast<double>(picked.size());
    for (std::size_t idx : picked) {
      Tensor loss = example_loss(model, data[idx]);
      loss_sum += loss.item();
      scale(loss, w).backward();
    }
    opt.step(lr);
    const double mean = loss_sum * w;
    log.steps.push_back({stage, step, lr, mean});
    rec.final_loss = mean;
  }
  rec.steps = total;

  for (auto& g : store.groups()) {
    if (!unlocked.contains(g.name())) rec.frozen_after[g.name()] = g.content_hash();
    for (auto& nt : g.tensors()) {
      nt.tensor.set_requires_grad(saved.at(nt.tensor.node()));
      nt.tensor.zero_grad();
    }
  }
  if (opts.merge && cfg.lora) model::lora_merge(model);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log.stages.push_back(std::move(rec));
  return log;
}

}  // namespace mpgui::training
