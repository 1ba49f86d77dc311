// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mpgui::training {

enum class StepId { Step1, Step2, Step3, Step4, Mft };

// "1".."4" or "MFT".
std::string_view to_string(StepId id);
StepId parse_step(std::string_view s);
std::vector<StepId> all_steps();

// One row of the stage's data mix. dataset is TAD, GAD, SAD or SynD.
struct DatasetSpec {
  std::string dataset;
  std::vector<std::string> tasks;
  std::size_t budget = 0;  // desk-scale sample count drawn for this row
};

struct LoraSpec {
  int rank = 8;
  double alpha = 16.0;
  std::vector<std::string> targets;  // base groups that receive adapters
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct StageConfig {
  StepId step = StepId::Step1;
  std::vector<DatasetSpec> datasets;
  // Trainable groups. Adapter groups appear as "<base>.lora".
  std::vector<std::string> unlocked;
  std::optional<LoraSpec> lora;
  double lr = 1e-5;
  double warmup_ratio = 0.03;
  double weight_decay = 0.01;
  int epochs = 1;
  int batch = 8;
  int max_tiles = 6;
  AdamConfig adam;
  // When > 0, replaces epochs * ceil(samples / batch).
  std::size_t max_steps = 0;

  // Reference sample counts from the original recipe, kept as metadata.
  std::vector<std::size_t> reference_budget;
  std::size_t reference_samples = 0;

  void validate() const;
  std::vector<std::string> task_tags() const;
};

StageConfig stage_schedule(StepId id);

// Reference totals. The per-row budgets sum to less than the reported total.
inline constexpr std::size_t kReferenceReportedTotal = 680000;
std::size_t reference_budget_sum();

// Alternate learning rates (Step 4 5e-6, MFT 5e-4), as opposed to the shipped defaults
// (1e-5 for Steps 1-4, 4e-5 for multi-task fine-tuning).
void apply_alternate_lr(StageConfig& cfg);

// Rank 128 / alpha 256, lr 2e-5, 3 epochs.
StageConfig navigation_preset();

nlohmann::json to_json(const StageConfig& cfg);
// Overlays the keys present in j onto base.
StageConfig apply_overrides(StageConfig base, const nlohmann::json& j);

// Linear warmup from 0 over ceil(warmup_ratio * total) steps, then cosine
// decay to 0. Throws ConfigError when total_steps is 0.
double lr_schedule(std::size_t global_step, std::size_t total_steps, double base_lr,
                   double warmup_ratio);
std::size_t warmup_steps(std::size_t total_steps, double warmup_ratio);

}  // namespace mpgui::training
