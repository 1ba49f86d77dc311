// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

// Python bindings. Structured results cross the boundary as JSON text and are
// decoded by the mpgui package; matrices travel as float64 numpy arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mpgui/cli/commands.hpp"
#include "mpgui/data/datasets.hpp"
#include "mpgui/data/scene.hpp"
#include "mpgui/errors.hpp"
#include "mpgui/eval/metrics.hpp"
#include "mpgui/model/model.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace mpgui;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
  return Tensor::from(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Array to_array(const Tensor& t) {
  Array out({t.rows(), t.cols()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

BBox to_box(const std::vector<int>& v) {
  if (v.size() != 4) throw InputError("a box needs 4 integers");
  return {v[0], v[1], v[2], v[3]};
}

std::string samples_json(const std::vector<data::Sample>& samples) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : samples) arr.push_back(nlohmann::json::parse(data::to_jsonl_line(s)));
  return arr.dump();
}

nlohmann::json metrics_json(const eval::EvalReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& m : r.metrics)
    rows.push_back({{"task", m.task}, {"metric", m.metric}, {"value", m.value}, {"n", m.n}});
  return rows;
}

}  // namespace

PYBIND11_MODULE(_mpgui, m) {
  m.doc() = "Toy multi-perceiver GUI grounding model: data forge, training and metrics";
  m.attr("__version__") = cli::kToolVersion;

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  auto contract = py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<EmptyPromptError>(m, "EmptyPromptError", contract.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto input = py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", input.ptr());
  py::register_exception<VersionError>(m, "VersionError", input.ptr());

  // metrics
  m.def("iou", [](const std::vector<int>& a, const std::vector<int>& b) {
    return eval::iou(to_box(a), to_box(b));
  });
  m.def("token_f1", [](const std::string& p, const std::string& g) { return eval::token_f1(p, g); });
  m.def("rouge_l", [](const std::string& p, const std::string& g) { return eval::rouge_l(p, g); });
  m.def("separation_score", [](const Array& emb, const std::string& labels) {
    const Tensor t = to_tensor(emb);
    if (labels.size() != t.rows()) throw ShapeError("one label per embedding row");
    std::vector<std::vector<double>> rows(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i)
      rows[i].assign(t.data().begin() + i * t.cols(), t.data().begin() + (i + 1) * t.cols());
    const std::vector<char> l(labels.begin(), labels.end());
    return eval::separation_score(rows, l);
  });

  // boxes
  m.def("scale_box", [](const std::vector<int>& px, int w, int h) {
    const BBox b = data::scale_box(to_box(px), w, h);
    return std::vector<int>{b.x_left, b.y_top, b.x_right, b.y_bottom};
  });
  m.def("small_object_ratio", [](const std::vector<int>& px, int w, int h) {
    return data::small_object_ratio(to_box(px), w, h);
  });

  // scenes and datasets
  m.def("gen_scene_json", [](std::uint64_t seed) {
    return data::scene_to_json(data::gen_screen(seed, {})).dump();
  });
  m.def("build_dataset_json", [](std::uint64_t seed, const std::string& kind) {
    const data::Scene s = data::gen_screen(seed, {});
    if (kind == "tad") return samples_json(data::build_tad(s));
    if (kind == "gad") return samples_json(data::build_gad(s));
    if (kind == "srp") return samples_json(data::build_srp(s, {}, seed));
    if (kind == "spe") return samples_json(data::build_synth_qa(s, data::QaKind::Spe));
    if (kind == "mpe") return samples_json(data::build_synth_qa(s, data::QaKind::Mpe));
    throw ConfigError("unknown dataset kind '" + kind + "'");
  });

  // fusion gate
  m.def(
      "fusion_gate",
      [](const Array& aligned, const Array& question, const Array& modality,
         const std::map<std::string, Array>& w) {
        auto get = [&](const char* k) {
          auto it = w.find(k);
          if (it == w.end()) throw ConfigError(std::string("missing gate weight ") + k);
          return to_tensor(it->second);
        };
        const model::FusionGateParams p{get("wq_g"), get("wk_g"), get("wv_g"),
                                        get("wq_t"), get("wk_t"), get("wv_t")};
        const auto out = model::fusion_gate(to_tensor(aligned), to_tensor(question),
                                            to_tensor(modality), p);
        return py::make_tuple(to_array(out.gating), to_array(out.fused));
      },
      py::arg("aligned"), py::arg("question"), py::arg("modality"), py::arg("weights"));

  // commands
  m.def(
      "forge",
      [](const std::string& config_json, const fs::path& out, bool force) {
        const cli::ForgeConfig cfg = cli::forge_config_from_json(nlohmann::json::parse(config_json));
        std::ostringstream log;
        const auto sum = cli::cmd_forge(cfg, out, force, "", log);
        return nlohmann::json{{"samples", sum.samples}, {"manifest", sum.manifest.to_json()}}.dump();
      },
      py::arg("config_json"), py::arg("out"), py::arg("force") = false);
  m.def("audit_srp", [](const fs::path& data_dir) {
    std::ostringstream log;
    const cli::SrpAudit a = cli::cmd_audit_srp(data_dir, log);
    return nlohmann::json{{"records", a.records},
                          {"type_counts", a.type_counts},
                          {"type3_violations", a.type3_violations},
                          {"type1_not_one_hop", a.type1_not_one_hop},
                          {"type4_related", a.type4_related},
                          {"ok", a.ok()}}
        .dump();
  });
  m.def(
      "train",
      [](const std::string& config_json, const fs::path& data_dir, const fs::path& out,
         bool force) {
        const cli::TrainConfig cfg = cli::train_config_from_json(nlohmann::json::parse(config_json));
        cli::TrainOptions opts;
        opts.data_dir = data_dir;
        opts.out = out;
        opts.force = force;
        std::ostringstream log;
        const auto sum = cli::cmd_train(cfg, opts, log);
        nlohmann::json stages = nlohmann::json::array();
        for (const auto& s : sum.log.stages)
          stages.push_back({{"stage", s.stage},
                            {"steps", s.steps},
                            {"final_loss", s.final_loss},
                            {"frozen_ok", s.frozen_ok()}});
        return nlohmann::json{{"stages", stages}, {"frozen_ok", sum.frozen_ok}}.dump();
      },
      py::arg("config_json"), py::arg("data_dir"), py::arg("out"), py::arg("force") = false);
  m.def(
      "evaluate",
      [](const fs::path& checkpoint, const fs::path& data_dir, const fs::path& out,
         const std::vector<std::string>& tasks, std::size_t max_per_task, bool force) {
        cli::EvalOptions eo;
        eo.checkpoint = checkpoint;
        eo.eval_dir = data_dir;
        eo.out = out;
        eo.tasks = tasks;
        eo.max_per_task = max_per_task;
        eo.force = force;
        std::ostringstream log;
        const auto sum = cli::cmd_eval(eo, log);
        return nlohmann::json{{"records", sum.records.size()}, {"metrics", metrics_json(sum.report)}}
            .dump();
      },
      py::arg("checkpoint"), py::arg("data_dir"), py::arg("out"),
      py::arg("tasks") = std::vector<std::string>{}, py::arg("max_per_task") = 0,
      py::arg("force") = false);
}
