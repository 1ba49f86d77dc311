// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "mpgui/data/templates.hpp"
#include "mpgui/errors.hpp"
#include "mpgui/eval/metrics.hpp"
#include "mpgui/model/tiling.hpp"
#include "mpgui/rng.hpp"

namespace mpgui::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const InputError&) {
    return kExitData;
  } catch (const json::exception&) {
    return kExitData;
  } catch (const NumericError&) {
    return kExitNumeric;
  } catch (...) {
    return kExitFailure;
  }
}

// ---------------------------------------------------------------------------
// Manifests and files
// ---------------------------------------------------------------------------

json RunManifest::to_json() const {
  return {{"command", command},
          {"config", config_path},
          {"seed", seed},
          {"stages", stages},
          {"out_dir", out_dir},
          {"tool_version", tool_version},
          {"resolved_config", resolved_config},
          {"files", files}};
}

std::string file_hash(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot read " + p.string());
  std::uint64_t h = kFnvOffset;
  char buf[1 << 14];
  while (f) {
    f.read(buf, sizeof buf);
    h = fnv1a(buf, static_cast<std::size_t>(f.gcount()), h);
  }
  return hash_hex(h);
}

std::map<std::string, std::string> hash_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel == "manifest.json") continue;
    out[rel] = file_hash(e.path());
  }
  return out;
}

void write_manifest(const RunManifest& m, const fs::path& dir) {
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  if (!f) throw InputError("cannot write manifest in " + dir.string());
  f << m.to_json().dump(2) << '\n';
}

json read_json_file(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw ConfigError("cannot read config " + p.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config " + p.string() + ": " + e.what());
  }
}

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) {
      throw ConfigError("output directory " + dir.string() + " exists; pass --force to replace it");
    }
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write " + p.string());
  f << s;
}

std::vector<std::string> step_names(const std::vector<training::StageConfig>& stages) {
  std::vector<std::string> out;
  for (const auto& s : stages) out.emplace_back(training::to_string(s.step));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// forge
// ---------------------------------------------------------------------------

void ForgeConfig::validate() const {
  if (screens < 1) throw ConfigError("forge: screens must be >= 1");
  gen.validate();
  if (srp.cap_per_type < 1 || srp.max_retries < 1) {
    throw ConfigError("forge: srp cap_per_type and max_retries must be >= 1");
  }
}

ForgeConfig forge_config_from_json(const json& j) {
  ForgeConfig c;
  try {
    if (j.contains("screens")) c.screens = j.at("screens").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("gen")) c.gen = data::gen_config_from_json(j.at("gen"));
    if (j.contains("srp")) {
      const auto& s = j.at("srp");
      if (s.contains("cap_per_type")) c.srp.cap_per_type = s.at("cap_per_type").get<int>();
      if (s.contains("max_retries")) c.srp.max_retries = s.at("max_retries").get<int>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("forge config: ") + e.what());
  }
  return c;
}

json to_json(const ForgeConfig& c) {
  return {{"screens", c.screens},
          {"seed", c.seed},
          {"gen", data::to_json(c.gen)},
          {"srp", {{"cap_per_type", c.srp.cap_per_type}, {"max_retries", c.srp.max_retries}}}};
}

std::uint64_t scene_seed(std::uint64_t run_seed, int index) {
  return run_seed * 100000ULL + static_cast<std::uint64_t>(index);
}

ForgeSummary cmd_forge(const ForgeConfig& cfg, const fs::path& out, bool force,
                       const std::string& config_path, std::ostream& log) {
  cfg.validate();
  prepare_out_dir(out, force);
  fs::create_directories(out / "images");
  fs::create_directories(out / "scenes");

  ForgeSummary sum;
  std::map<std::string, std::vector<data::Sample>> files = {
      {"tad.jsonl", {}}, {"gad.jsonl", {}}, {"srp.jsonl", {}}, {"spe.jsonl", {}}, {"mpe.jsonl", {}}};
  for (int i = 0; i < cfg.screens; ++i) {
    const data::Scene scene = data::gen_screen(scene_seed(cfg.seed, i), cfg.gen);
    write_pgm(out / data::image_ref(scene.seed), scene.raster);
    write_text(out / "scenes" / (std::to_string(scene.seed) + ".json"),
               data::scene_to_json(scene).dump() + "\n");
    auto append = [&](const char* f, std::vector<data::Sample> v) {
      auto& dst = files[f];
      for (auto& s : v) dst.push_back(std::move(s));
    };
    append("tad.jsonl", data::build_tad(scene));
    append("gad.jsonl", data::build_gad(scene));
    append("srp.jsonl", data::build_srp(scene, cfg.srp, cfg.seed, &sum.srp));
    append("spe.jsonl", data::build_synth_qa(scene, data::QaKind::Spe));
    auto mpe = data::build_synth_qa(scene, data::QaKind::Mpe);
    for (const auto& s : mpe) {
      if (s.image != data::image_ref(scene.seed)) {
        write_pgm(out / s.image, data::sample_image(scene, s));
      }
    }
    append("mpe.jsonl", std::move(mpe));
  }
  for (auto& [name, samples] : files) {
    data::sort_samples(samples);
    data::serialize_jsonl(samples, out / name);
    sum.samples[name] = samples.size();
    log << name << ": " << samples.size() << " samples\n";
  }
  log << "srp: type3 skipped " << sum.srp.type3_skipped << "\n";

  sum.manifest.command = "forge";
  sum.manifest.config_path = config_path;
  sum.manifest.seed = cfg.seed;
  sum.manifest.out_dir = out.generic_string();
  sum.manifest.resolved_config = to_json(cfg);
  sum.manifest.files = hash_tree(out);
  write_manifest(sum.manifest, out);
  return sum;
}

// ---------------------------------------------------------------------------
// audit-srp
// ---------------------------------------------------------------------------

namespace {

BBox box_from(const json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

// The two boxes shown in an SRP prompt, in order.
std::pair<BBox, BBox> prompt_boxes(const std::string& prompt) {
  const auto first = parse_box(prompt);
  const auto close = prompt.find("</box>");
  const auto second = close == std::string::npos ? std::nullopt : parse_box(prompt.substr(close));
  if (!first || !second) throw InputError("SRP prompt without two boxes: " + prompt);
  return {*first, *second};
}

}  // namespace

SrpAudit audit_srp_samples(const std::vector<data::Sample>& samples,
                           const std::map<std::uint64_t, data::Scene>& scenes) {
  SrpAudit a;
  for (const auto& s : samples) {
    if (s.task != data::kTaskSrp) continue;
    ++a.records;
    const int type = s.meta.at("srp_type").get<int>();
    if (type < 1 || type > 4) throw InputError("SRP record with type " + std::to_string(type));
    ++a.type_counts[type - 1];
    const auto seed = s.meta.at("seed").get<std::uint64_t>();
    auto it = scenes.find(seed);
    if (it == scenes.end()) throw InputError("no scene tree for seed " + std::to_string(seed));
    const auto flat = it->second.flatten();
    const auto nodes = s.meta.at("nodes").get<std::vector<int>>();
    if (type == 3) {
      const int id = nodes.at(0);
      const BBox orig = flat.at(id).node->bbox;
      const BBox parent = flat.at(flat.at(id).parent).node->bbox;
      const BBox expanded = box_from(s.meta.at("expanded_px"));
      const int w = it->second.width, h = it->second.height;
      const auto [p_exp, p_orig] = prompt_boxes(s.prompt);
      const bool px_ok = expanded.contains(orig) && eval::iou(expanded, orig) <= 0.1 &&
                         eval::iou(expanded, parent) <= 0.3;
      const bool scaled_ok = eval::iou(p_exp, p_orig) <= 0.1 &&
                             eval::iou(p_exp, data::scale_box(parent, w, h)) <= 0.3 &&
                             p_orig == data::scale_box(orig, w, h);
      if (!px_ok || !scaled_ok) ++a.type3_violations;
    } else if (type == 1) {
      const int p = nodes.at(0), c = nodes.at(1);
      if (flat.at(c).parent != p || p == 0) ++a.type1_not_one_hop;
    } else if (type == 4) {
      const int x = nodes.at(0), y = nodes.at(1);
      const BBox bx = flat.at(x).node->bbox, by = flat.at(y).node->bbox;
      if (flat.at(x).parent == y || flat.at(y).parent == x || flat.at(x).parent == flat.at(y).parent ||
          bx.contains(by) || by.contains(bx)) {
        ++a.type4_related;
      }
    }
  }
  return a;
}

SrpAudit cmd_audit_srp(const fs::path& data_dir, std::ostream& log) {
  const auto samples = data::load_jsonl(data_dir / "srp.jsonl");
  std::map<std::uint64_t, data::Scene> scenes;
  for (const auto& s : samples) {
    const auto seed = s.meta.at("seed").get<std::uint64_t>();
    if (scenes.contains(seed)) continue;
    const fs::path p = data_dir / "scenes" / (std::to_string(seed) + ".json");
    std::ifstream f(p);
    if (!f) throw InputError("missing scene tree " + p.string());
    scenes.emplace(seed, data::scene_from_json(json::parse(f)));
  }
  const SrpAudit a = audit_srp_samples(samples, scenes);
  log << "srp records " << a.records << " (types " << a.type_counts[0] << "/" << a.type_counts[1]
      << "/" << a.type_counts[2] << "/" << a.type_counts[3] << ")\n";
  log << "type3 violations " << a.type3_violations << "\n";
  log << "type1 pairs not 1-hop " << a.type1_not_one_hop << "\n";
  log << "type4 pairs related " << a.type4_related << "\n";
  return a;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  try {
    if (j.contains("model")) c.model = model::model_config_from_json(j.at("model"));
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    std::vector<std::string> names = {"1", "2", "3", "4"};
    if (j.contains("stages")) names = j.at("stages").get<std::vector<std::string>>();
    for (const auto& n : names) {
      training::StageConfig s = training::stage_schedule(training::parse_step(n));
      if (j.contains("lr_preset") && j.at("lr_preset").get<std::string>() == "alternate") {
        training::apply_alternate_lr(s);
      }
      if (j.contains("defaults")) s = training::apply_overrides(s, j.at("defaults"));
      if (j.contains("overrides") && j.at("overrides").contains(n)) {
        s = training::apply_overrides(s, j.at("overrides").at(n));
      }
      s.validate();
      c.stages.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  return c;
}

json to_json(const TrainConfig& c) {
  json stages = json::array();
  for (const auto& s : c.stages) stages.push_back(training::to_json(s));
  json m = model::to_json(c.model);
  m.erase("vocab");
  m["vocab_fingerprint"] = hash_hex(c.model.vocab.fingerprint());
  return {{"model", m}, {"seed", c.seed}, {"stages", stages}};
}

std::string checkpoint_name(training::StepId step) {
  return "ckpt_stage" + std::string(training::to_string(step)) + ".txt";
}

void save_model(const model::Model& m, const fs::path& path, const std::string& stage,
                std::uint64_t seed) {
  if (!m.adapters().empty()) throw ContractError("save_model: merge adapters first");
  json cfg = model::to_json(m.config());
  cfg.erase("vocab");
  save_checkpoint(path, m.params(),
                  {{"stage", stage},
                   {"seed", std::to_string(seed)},
                   {"model", cfg.dump()},
                   {"vocab", hash_hex(m.vocab().fingerprint())},
                   {"tool_version", kToolVersion}});
}

model::Model load_model(const fs::path& path, std::string* stage) {
  const Checkpoint ck = read_checkpoint(path);
  auto get = [&](const char* k) {
    auto it = ck.meta.find(k);
    if (it == ck.meta.end()) throw VersionError("checkpoint " + path.string() + " lacks meta " + k);
    return it->second;
  };
  model::ModelConfig cfg;
  try {
    cfg = model::model_config_from_json(json::parse(get("model")));
  } catch (const json::exception& e) {
    throw VersionError("checkpoint model config unreadable: " + std::string(e.what()));
  }
  if (get("vocab") != hash_hex(cfg.vocab.fingerprint())) {
    throw VersionError("checkpoint vocabulary " + get("vocab") + " does not match built-in " +
                       hash_hex(cfg.vocab.fingerprint()));
  }
  const std::uint64_t seed = std::stoull(get("seed"));
  model::Model m(cfg, seed);
  load_into(ck, m.params());
  if (stage != nullptr) *stage = get("stage");
  return m;
}

std::vector<training::Example> make_examples(const model::Model& m,
                                             const std::vector<data::Sample>& samples,
                                             const fs::path& data_dir, int max_tiles) {
  training::ImageCache cache(data_dir);
  std::vector<training::Example> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(training::make_example(m, s, cache.get(s.image), max_tiles));
  }
  return out;
}

TrainSummary cmd_train(const TrainConfig& cfg, const TrainOptions& opts, std::ostream& log) {
  if (cfg.stages.empty()) throw ConfigError("train: no stages configured");
  TrainSummary sum;
  if (opts.dry_run) {
    log << to_json(cfg).dump(2) << "\n";
    return sum;
  }

  std::size_t first = 0;
  std::optional<model::Model> loaded;
  if (opts.resume) {
    std::string done;
    loaded.emplace(load_model(*opts.resume, &done));
    const training::StepId done_step = training::parse_step(done);
    auto it = std::find_if(cfg.stages.begin(), cfg.stages.end(),
                           [&](const auto& s) { return s.step == done_step; });
    if (it == cfg.stages.end()) {
      throw ConfigError("resume checkpoint is from stage " + done + ", which is not configured");
    }
    first = static_cast<std::size_t>(it - cfg.stages.begin()) + 1;
    if (!(loaded->config().vocab == cfg.model.vocab) ||
        model::to_json(loaded->config()) != model::to_json(cfg.model)) {
      throw ConfigError("resume checkpoint model config differs from the run config");
    }
  }
  prepare_out_dir(opts.out, opts.force);

  model::Model m = loaded ? std::move(*loaded) : model::Model(cfg.model, cfg.seed);
  if (!opts.resume) save_model(m, opts.out / "ckpt_init.txt", "init", cfg.seed);
  json stage_summary = json::array();
  for (std::size_t i = first; i < cfg.stages.size(); ++i) {
    const auto& sc = cfg.stages[i];
    const std::string name(training::to_string(sc.step));
    const auto samples = training::select_stage_samples(sc, opts.data_dir, cfg.seed);
    const auto examples = make_examples(m, samples, opts.data_dir, sc.max_tiles);
    log << "stage " << name << ": " << examples.size() << " examples\n";
    training::TrainLog tl = training::run_stage(sc, examples, m, cfg.seed);
    const auto& rec = tl.stages.back();
    for (const auto& [g, h] : rec.frozen_before) {
      const bool same = rec.frozen_after.at(g) == h;
      log << "  frozen " << g << " " << hash_hex(h) << " -> " << hash_hex(rec.frozen_after.at(g))
          << (same ? " ok" : " CHANGED") << "\n";
    }
    char timing[96];
    std::snprintf(timing, sizeof timing, "  steps %zu, final loss %.6f, %.1fs\n", rec.steps,
                  rec.final_loss, rec.wall_seconds);
    log << timing;
    sum.frozen_ok = sum.frozen_ok && rec.frozen_ok();
    save_model(m, opts.out / checkpoint_name(sc.step), name, cfg.seed);
    json frozen = json::object();
    for (const auto& [g, h] : rec.frozen_before) frozen[g] = hash_hex(h);
    stage_summary.push_back({{"stage", name},
                             {"steps", rec.steps},
                             {"examples", rec.examples},
                             {"final_loss", rec.final_loss},
                             {"frozen", frozen},
                             {"frozen_ok", rec.frozen_ok()},
                             {"lora", rec.lora_keys}});
    sum.log.append(tl);
  }
  write_text(opts.out / "train_log.jsonl", sum.log.to_jsonl());
  write_text(opts.out / "stages.json", stage_summary.dump(2) + "\n");

  sum.manifest.command = "train";
  sum.manifest.config_path = opts.config_path;
  sum.manifest.seed = cfg.seed;
  sum.manifest.stages = step_names(cfg.stages);
  sum.manifest.out_dir = opts.out.generic_string();
  sum.manifest.resolved_config = to_json(cfg);
  if (opts.resume) sum.manifest.resolved_config["resume"] = opts.resume->generic_string();
  sum.manifest.files = hash_tree(opts.out);
  write_manifest(sum.manifest, opts.out);
  if (!sum.frozen_ok) throw ContractError("train: a frozen parameter group changed");
  return sum;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

eval::PredRecord score_record(const data::Sample& s, std::string prediction) {
  eval::PredRecord r;
  r.id = data::sample_id(s);
  r.task = s.task;
  r.prediction = std::move(prediction);
  r.gold = s.target;
  r.width = s.meta.value("W", 0);
  r.height = s.meta.value("H", 0);
  if (s.task == data::kTaskText2Bbox) {
    r.gold_box = parse_box(s.target);
    r.pred_box = parse_box(r.prediction);
    if (s.meta.contains("px")) r.gold_px = box_from(s.meta.at("px"));
  }
  return r;
}

std::vector<eval::PredRecord> predict(const model::Model& m,
                                      const std::vector<data::Sample>& samples,
                                      const fs::path& data_dir, int max_tiles) {
  training::ImageCache cache(data_dir);
  std::vector<eval::PredRecord> out;
  for (const auto& s : samples) {
    const auto ex = training::make_example(m, s, cache.get(s.image), max_tiles);
    const auto ids = m.greedy_decode(*ex.tiles, ex.question, m.config().max_answer_tokens);
    out.push_back(score_record(s, m.vocab().decode(ids)));
  }
  return out;
}

EvalSummary cmd_eval(const EvalOptions& opts, std::ostream& log) {
  std::string stage;
  const model::Model m = load_model(opts.checkpoint, &stage);
  std::vector<data::Sample> samples;
  std::map<std::string, std::size_t> taken;
  for (const char* f : {"tad.jsonl", "gad.jsonl", "srp.jsonl", "spe.jsonl", "mpe.jsonl"}) {
    if (!fs::exists(opts.eval_dir / f)) continue;
    for (auto& s : data::load_jsonl(opts.eval_dir / f)) {
      if (!opts.tasks.empty() &&
          std::find(opts.tasks.begin(), opts.tasks.end(), s.task) == opts.tasks.end()) {
        continue;
      }
      if (opts.max_per_task > 0 && taken[s.task] >= opts.max_per_task) continue;
      ++taken[s.task];
      samples.push_back(std::move(s));
    }
  }
  if (samples.empty()) throw InputError("eval: no samples in " + opts.eval_dir.string());
  prepare_out_dir(opts.out, opts.force);

  EvalSummary sum;
  sum.records = predict(m, samples, opts.eval_dir, m.config().max_tiles);
  sum.report = eval::build_report(sum.records, opts.bins, opts.bin_threshold);
  if (stage == "init") {
    sum.report.notes.push_back("untrained checkpoint: expect near-random performance");
  }
  eval::write_report(sum.report, sum.records, opts.out);
  log << "evaluated " << sum.records.size() << " samples from stage " << stage << "\n";
  for (const auto& r : sum.report.metrics) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-12s %-12s %8.2f\n", r.task.c_str(), r.metric.c_str(),
                  r.value);
    log << line;
  }
  sum.manifest.command = "eval";
  sum.manifest.config_path = opts.checkpoint.generic_string();
  sum.manifest.stages = {stage};
  sum.manifest.out_dir = opts.out.generic_string();
  sum.manifest.resolved_config = {{"eval_dir", opts.eval_dir.generic_string()},
                                  {"tasks", opts.tasks},
                                  {"max_per_task", opts.max_per_task},
                                  {"bins", opts.bins},
                                  {"bin_threshold", opts.bin_threshold}};
  sum.manifest.files = hash_tree(opts.out);
  write_manifest(sum.manifest, opts.out);
  return sum;
}

// ---------------------------------------------------------------------------
// embed-export
// ---------------------------------------------------------------------------

EmbedRows export_embeddings(const model::Model& m, const std::vector<data::Scene>& scenes) {
  NoGradGuard no_grad;
  EmbedRows rows;
  for (const auto& sc : scenes) {
    const auto tiles = model::tile_image(sc.raster, m.config());
    const Tensor f = m.encode_backbone(tiles);
    for (auto p : {model::Perceiver::Textual, model::Perceiver::Graphical,
                   model::Perceiver::Spatial}) {
      const Tensor x = m.perceive(f, p);
      for (std::size_t t = 0; t < x.rows(); ++t) {
        auto row = x.data().subspan(t * x.cols(), x.cols());
        rows.embeddings.emplace_back(row.begin(), row.end());
        rows.labels.push_back(model::perceiver_label(p));
        rows.scenes.push_back(sc.seed);
        rows.tokens.push_back(t);
      }
    }
  }
  return rows;
}

std::vector<data::Scene> load_scenes(const fs::path& data_dir, std::size_t limit) {
  const fs::path dir = data_dir / "scenes";
  if (!fs::is_directory(dir)) throw InputError("no scenes directory in " + data_dir.string());
  std::vector<std::pair<std::uint64_t, fs::path>> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") {
      files.emplace_back(std::stoull(e.path().stem().string()), e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (limit > 0 && files.size() > limit) files.resize(limit);
  std::vector<data::Scene> out;
  for (const auto& [seed, p] : files) {
    std::ifstream f(p);
    out.push_back(data::scene_from_json(json::parse(f)));
  }
  return out;
}

EmbedSummary cmd_embed_export(const fs::path& checkpoint, const fs::path& data_dir,
                              std::size_t scenes, const fs::path& out_csv, std::ostream& log) {
  std::string stage;
  const model::Model m = load_model(checkpoint, &stage);
  const auto sc = load_scenes(data_dir, scenes);
  if (sc.empty()) throw InputError("embed-export: no scenes in " + data_dir.string());
  const EmbedRows rows = export_embeddings(m, sc);
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  {
    std::ofstream f(out_csv, std::ios::binary);
    if (!f) throw InputError("cannot write " + out_csv.string());
    f << "scene,token,perceiver";
    for (int k = 0; k < m.config().model_width; ++k) f << ",e" << k;
    f << '\n';
    char buf[32];
    for (std::size_t i = 0; i < rows.labels.size(); ++i) {
      f << rows.scenes[i] << ',' << rows.tokens[i] << ',' << rows.labels[i];
      for (double v : rows.embeddings[i]) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        f << buf;
      }
      f << '\n';
    }
  }
  EmbedSummary sum;
  sum.rows = rows.labels.size();
  sum.separation = eval::separation_score(rows.embeddings, rows.labels);
  char line[96];
  std::snprintf(line, sizeof line, "rows %zu, separation %.6f\n", sum.rows, sum.separation);
  log << line;
  sum.manifest.command = "embed-export";
  sum.manifest.config_path = checkpoint.generic_string();
  sum.manifest.stages = {stage};
  sum.manifest.out_dir = out_csv.parent_path().generic_string();
  sum.manifest.resolved_config = {{"data_dir", data_dir.generic_string()},
                                  {"scenes", scenes},
                                  {"separation", sum.separation}};
  sum.manifest.files = {{out_csv.filename().generic_string(), file_hash(out_csv)}};
  std::ofstream mf(out_csv.string() + ".manifest.json", std::ios::binary);
  mf << sum.manifest.to_json().dump(2) << '\n';
  return sum;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

std::string cmd_report(const fs::path& eval_dir) {
  auto read_rows = [](const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw InputError("cannot read " + p.string());
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(f, line);) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
      rows.push_back(std::move(cells));
    }
    return rows;
  };
  std::ostringstream out;
  auto table = [&](const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
      width.resize(std::max(width.size(), r.size()), 0);
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
      for (std::size_t i = 0; i < rows[k].size(); ++i) {
        out << std::left << std::setw(static_cast<int>(width[i]) + 2) << rows[k][i];
      }
      out << '\n';
      if (k == 0) {
        for (std::size_t w : width) out << std::string(w, '-') << "  ";
        out << '\n';
      }
    }
  };
  table(read_rows(eval_dir / "report.csv"));
  out << '\n';
  table(read_rows(eval_dir / "size_bins.csv"));
  return out.str();
}

}  // namespace mpgui::cli
