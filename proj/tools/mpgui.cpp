// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line entry point: forge, train, eval, embed-export, audit-srp,
// report.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mpgui/cli/commands.hpp"
#include "mpgui/errors.hpp"

namespace fs = std::filesystem;
using namespace mpgui;

int main(int argc, char** argv) {
  CLI::App app{"mpgui: synthetic GUI perception toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kToolVersion);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool force = false;
  bool dry_run = false;
  auto common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", config, "JSON config file");
    sub->add_option("--seed", seed, "Seed (overrides the config)");
    auto* o = sub->add_option("--out", out, "Output directory");
    if (needs_out) o->required();
    sub->add_flag("--force", force, "Replace an existing output directory");
    sub->add_flag("--dry-run", dry_run, "Print the resolved config and exit");
  };

  auto* forge = app.add_subcommand("forge", "Generate scenes and the five datasets");
  std::optional<int> screens;
  common(forge, true);
  forge->add_option("--screens", screens, "Number of screens (overrides the config)");

  auto* train = app.add_subcommand("train", "Run the multi-stage training schedule");
  std::string data_dir;
  std::string resume;
  common(train, true);
  train->add_option("--data", data_dir, "Forged dataset directory")->required();
  train->add_option("--resume", resume, "Checkpoint of a completed stage");

  auto* evalc = app.add_subcommand("eval", "Greedy-decode an eval set and score it");
  std::string checkpoint;
  std::vector<std::string> tasks;
  std::size_t max_per_task = 0;
  common(evalc, true);
  evalc->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  evalc->add_option("--data", data_dir, "Forged eval directory")->required();
  evalc->add_option("--tasks", tasks, "Restrict to these task tags (comma separated)")->delimiter(',');
  evalc->add_option("--max-per-task", max_per_task, "Cap samples per task");

  auto* embed = app.add_subcommand("embed-export", "Export per-token perceiver embeddings");
  std::size_t n_scenes = 0;
  std::string csv = "embeddings.csv";
  common(embed, false);
  embed->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  embed->add_option("--data", data_dir, "Directory with scenes/")->required();
  embed->add_option("--scenes", n_scenes, "Number of scenes (0 = all)");
  embed->add_option("--csv", csv, "CSV file name inside --out");

  auto* audit = app.add_subcommand("audit-srp", "Re-check SRP constraints of a forged set");
  common(audit, false);
  audit->add_option("--data", data_dir, "Forged dataset directory")->required();

  auto* report = app.add_subcommand("report", "Render an eval directory as tables");
  common(report, false);
  report->add_option("--data", data_dir, "Eval output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (forge->parsed()) {
      cli::ForgeConfig fc;
      if (!config.empty()) fc = cli::forge_config_from_json(cli::read_json_file(config));
      if (seed) fc.seed = *seed;
      if (screens) fc.screens = *screens;
      fc.validate();
      if (dry_run) {
        std::cout << cli::to_json(fc).dump(2) << "\n";
        return cli::kExitOk;
      }
      cli::cmd_forge(fc, out, force, config, std::cout);
    } else if (train->parsed()) {
      nlohmann::json j = config.empty() ? nlohmann::json::object() : cli::read_json_file(config);
      cli::TrainConfig tc = cli::train_config_from_json(j);
      if (seed) tc.seed = *seed;
      cli::TrainOptions opts;
      opts.data_dir = data_dir;
      opts.out = out;
      opts.force = force;
      opts.dry_run = dry_run;
      opts.config_path = config;
      if (!resume.empty()) opts.resume = fs::path(resume);
      cli::cmd_train(tc, opts, std::cout);
    } else if (evalc->parsed()) {
      cli::EvalOptions opts;
      opts.checkpoint = checkpoint;
      opts.eval_dir = data_dir;
      opts.out = out;
      opts.tasks = tasks;
      opts.max_per_task = max_per_task;
      opts.force = force;
      cli::cmd_eval(opts, std::cout);
    } else if (embed->parsed()) {
      const fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
      cli::cmd_embed_export(checkpoint, data_dir, n_scenes, dir / csv, std::cout);
    } else if (audit->parsed()) {
      const auto a = cli::cmd_audit_srp(data_dir, std::cout);
      return a.ok() ? cli::kExitOk : cli::kExitData;
    } else if (report->parsed()) {
      std::cout << cli::cmd_report(data_dir);
    }
  } catch (...) {
    const int code = cli::exit_code_for_current_exception();
    try {
      throw;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
    }
    return code;
  }
  return cli::kExitOk;
}
