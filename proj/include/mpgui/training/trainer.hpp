// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpgui/data/datasets.hpp"
#include "mpgui/image.hpp"
#include "mpgui/model/model.hpp"
#include "mpgui/training/stage.hpp"

namespace mpgui::training {

// A tokenized training or evaluation pair. answer ends with <eos>.
struct Example {
  std::string id;
  std::string task;
  std::shared_ptr<const model::TileSet> tiles;
  std::vector<int> question;
  std::vector<int> answer;
};

// Loads side-file images on first use and keeps them.
class ImageCache {
 public:
  explicit ImageCache(std::filesystem::path root) : root_(std::move(root)) {}
  const GrayImage& get(const std::string& ref);

 private:
  std::filesystem::path root_;
  std::map<std::string, GrayImage> images_;
};

Example make_example(const model::Model& model, const data::Sample& sample,
                     const GrayImage& image, int max_tiles);

// Teacher-forced loss of one example: the decoder sees the prefix plus all but
// the last answer token and is scored on answer positions only.
Tensor example_loss(const model::Model& model, const Example& ex);

// jsonl file holding each dataset tag.
std::vector<std::string> dataset_files(const std::string& dataset);

// Draws each DatasetSpec row from the samples in data_dir: filter by task,
// shuffle by seed, keep the first `budget`. Throws ConfigError naming the
// stage when a row has no samples.
std::vector<data::Sample> select_stage_samples(const StageConfig& cfg,
                                               const std::filesystem::path& data_dir,
                                               std::uint64_t seed);

struct StepRecord {
  std::string stage;
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct StageRecord {
  std::string stage;
  double wall_seconds = 0.0;
  double final_loss = 0.0;
  std::size_t steps = 0;
  std::size_t examples = 0;
  std::vector<std::string> lora_keys;
  // Content hashes of every group outside `unlocked`, before and after the
  // optimization loop (and before any adapter merge).
  std::map<std::string, std::uint64_t> frozen_before;
  std::map<std::string, std::uint64_t> frozen_after;
  bool frozen_ok() const { return frozen_before == frozen_after; }
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<StageRecord> stages;

  void append(const TrainLog& other);
  // One {stage, step, lr, loss} record per line.
  std::string to_jsonl() const;
};

struct RunOptions {
  // Fold adapters into their base weights after the stage.
  bool merge = true;
};

TrainLog run_stage(const StageConfig& cfg, std::span<const Example> data, model::Model& model,
                   std::uint64_t seed, const RunOptions& opts = {});

}  // namespace mpgui::training
