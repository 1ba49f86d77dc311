// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpgui/data/datasets.hpp"
#include "mpgui/data/scene.hpp"
#include "mpgui/eval/report.hpp"
#include "mpgui/model/model.hpp"
#include "mpgui/training/stage.hpp"
#include "mpgui/training/trainer.hpp"

namespace mpgui::cli {

inline constexpr const char* kToolVersion = "0.3.0";

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// Maps the current exception (call from a catch block) to an exit code.
int exit_code_for_current_exception();

struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<std::string> stages;
  std::string out_dir;
  std::string tool_version = kToolVersion;
  nlohmann::json resolved_config = nlohmann::json::object();
  std::map<std::string, std::string> files;  // relative path -> FNV-1a 64 hex

  nlohmann::json to_json() const;
};

// Hash of a file's bytes.
std::string file_hash(const std::filesystem::path& p);
// Hashes every regular file below dir except manifest.json.
std::map<std::string, std::string> hash_tree(const std::filesystem::path& dir);
void write_manifest(const RunManifest& m, const std::filesystem::path& dir);

nlohmann::json read_json_file(const std::filesystem::path& p);

// Refuses an existing non-empty directory unless force is set, in which case
// it is cleared.
void prepare_out_dir(const std::filesystem::path& dir, bool force);

// ---------------------------------------------------------------------------
// forge
// ---------------------------------------------------------------------------

struct ForgeConfig {
  int screens = 50;
  std::uint64_t seed = 7;
  data::GenConfig gen;
  data::SrpConfig srp;

  void validate() const;
};

ForgeConfig forge_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ForgeConfig& c);

// Scene seed of screen i in a forge run.
std::uint64_t scene_seed(std::uint64_t run_seed, int index);

struct ForgeSummary {
  std::map<std::string, std::size_t> samples;  // file -> record count
  data::SrpStats srp;
  RunManifest manifest;
};

ForgeSummary cmd_forge(const ForgeConfig& cfg, const std::filesystem::path& out, bool force,
                       const std::string& config_path, std::ostream& log);

// ---------------------------------------------------------------------------
// audit-srp
// ---------------------------------------------------------------------------

struct SrpAudit {
  std::size_t records = 0;
  std::size_t type_counts[4] = {0, 0, 0, 0};
  std::size_t type3_violations = 0;
  std::size_t type1_not_one_hop = 0;
  std::size_t type4_related = 0;
  bool ok() const { return type3_violations == 0 && type1_not_one_hop == 0 && type4_related == 0; }
};

// Re-checks srp.jsonl against the exported scene trees with the metrics IoU.
SrpAudit audit_srp_samples(const std::vector<data::Sample>& samples,
                           const std::map<std::uint64_t, data::Scene>& scenes);
SrpAudit cmd_audit_srp(const std::filesystem::path& data_dir, std::ostream& log);

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainConfig {
  model::ModelConfig model;
  std::vector<training::StageConfig> stages;
  std::uint64_t seed = 0;
};

// {"model": {...}, "stages": ["1",...], "seed": n, "overrides": {"1": {...}}}
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);

struct TrainOptions {
  std::filesystem::path data_dir;
  std::filesystem::path out;
  std::optional<std::filesystem::path> resume;  // checkpoint of a completed stage
  bool force = false;
  bool dry_run = false;
  std::string config_path;
};

struct TrainSummary {
  training::TrainLog log;
  RunManifest manifest;
  bool frozen_ok = true;
};

TrainSummary cmd_train(const TrainConfig& cfg, const TrainOptions& opts, std::ostream& log);

std::string checkpoint_name(training::StepId step);
void save_model(const model::Model& m, const std::filesystem::path& path,
                const std::string& stage, std::uint64_t seed);
// Rebuilds the model from checkpoint metadata. Throws VersionError when the
// checkpoint vocabulary differs from the built-in one.
model::Model load_model(const std::filesystem::path& path, std::string* stage = nullptr);

// Tokenizes samples against their images under data_dir.
std::vector<training::Example> make_examples(const model::Model& m,
                                             const std::vector<data::Sample>& samples,
                                             const std::filesystem::path& data_dir,
                                             int max_tiles);

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path eval_dir;
  std::filesystem::path out;
  std::vector<std::string> tasks;  // empty: every task present
  std::size_t max_per_task = 0;     // 0: all
  bool force = false;
  std::vector<double> bins{0.3, 1.0, 5.0, 100.0};
  double bin_threshold = 0.5;
};

// Greedy-decodes each sample and scores it.
std::vector<eval::PredRecord> predict(const model::Model& m,
                                      const std::vector<data::Sample>& samples,
                                      const std::filesystem::path& data_dir, int max_tiles);
eval::PredRecord score_record(const data::Sample& s, std::string prediction);

struct EvalSummary {
  eval::EvalReport report;
  std::vector<eval::PredRecord> records;
  RunManifest manifest;
};

EvalSummary cmd_eval(const EvalOptions& opts, std::ostream& log);

// ---------------------------------------------------------------------------
// embed-export
// ---------------------------------------------------------------------------

struct EmbedRows {
  std::vector<std::vector<double>> embeddings;
  std::vector<char> labels;
  std::vector<std::uint64_t> scenes;
  std::vector<std::size_t> tokens;
};

// Per-token perceiver outputs for each scene raster.
EmbedRows export_embeddings(const model::Model& m, const std::vector<data::Scene>& scenes);
std::vector<data::Scene> load_scenes(const std::filesystem::path& data_dir, std::size_t limit);

struct EmbedSummary {
  std::size_t rows = 0;
  double separation = 0.0;
  RunManifest manifest;
};

EmbedSummary cmd_embed_export(const std::filesystem::path& checkpoint,
                              const std::filesystem::path& data_dir, std::size_t scenes,
                              const std::filesystem::path& out_csv, std::ostream& log);

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

// Renders report.csv and size_bins.csv of an eval directory as text tables.
std::string cmd_report(const std::filesystem::path& eval_dir);

}  // namespace mpgui::cli
