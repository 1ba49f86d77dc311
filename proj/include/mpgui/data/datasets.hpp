// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mpgui/bbox.hpp"
#include "mpgui/data/scene.hpp"
#include "mpgui/image.hpp"

namespace mpgui::data {

// Task tags as written to the "task" field.
inline constexpr std::string_view kTaskText2Bbox = "text2bbox";
inline constexpr std::string_view kTaskBbox2Text = "bbox2text";
inline constexpr std::string_view kTaskSrp = "SRP";
inline constexpr std::string_view kTaskSpe = "SPE-QA";
inline constexpr std::string_view kTaskMpe = "MPE-QA";
inline constexpr std::string_view kTaskLocalDesc = "local-desc";

bool is_task(std::string_view task);

// One conversational QA pair. meta always carries "seed", "nodes" (ids) and
// "template"; other keys depend on the task.
struct Sample {
  std::string task;
  std::string image;  // side-file reference relative to the dataset dir
  std::string prompt;
  std::string target;
  nlohmann::json meta = nlohmann::json::object();

  bool operator==(const Sample&) const = default;
};

// Stable identifier built from seed, task, template, node ids and subset tags.
std::string sample_id(const Sample& s);
// Orders by (scene seed, task, first node id, sample id).
void sort_samples(std::vector<Sample>& samples);

std::string image_ref(std::uint64_t seed);
std::string marked_image_ref(std::uint64_t seed, int node_id);

// Human-readable name of a leaf: its text, or "<code> icon".
std::string describe_leaf(const VHNode& n);

std::vector<Sample> build_tad(const Scene& scene);

// General pairs for every icon, plus a duplicate "small" subset for icons
// with ratio <= kSmallObjectPercent (meta.subset = "general" | "small").
std::vector<Sample> build_gad(const Scene& scene);

inline constexpr std::string_view kSrpLabels[4] = {
    "parent and child",
    "siblings",
    "containment without relation",
    "no relation",
};

struct SrpConfig {
  int cap_per_type = 4;
  int max_retries = 64;
};

struct SrpStats {
  int emitted[4] = {0, 0, 0, 0};
  int type3_skipped = 0;  // nodes whose expansion failed after max_retries
};

// Checks the two IoU bounds of a containment negative using exact integer
// arithmetic.
bool type3_bounds_ok(const BBox& expanded, const BBox& original, const BBox& parent);

std::vector<Sample> build_srp(const Scene& scene, const SrpConfig& cfg, std::uint64_t seed,
                              SrpStats* stats = nullptr);

enum class QaKind { Spe, Mpe };

// SPE: text, icon and location questions per leaf. MPE: one global
// description plus a local description per leaf on a marked image.
std::vector<Sample> build_synth_qa(const Scene& scene, QaKind kind);

// "top left" ... "bottom right", "center" for the middle cell.
std::string location_phrase(const BBox& px, int width, int height);

// Copy with a 1-pixel outline at kMarkIntensity. Throws InputError when the
// box is empty or leaves the image.
GrayImage render_marks(const GrayImage& raster, const BBox& px);

// Raster a sample refers to: the scene image, or its marked copy.
GrayImage sample_image(const Scene& scene, const Sample& s);

void serialize_jsonl(const std::vector<Sample>& samples, const std::filesystem::path& path);
std::string to_jsonl_line(const Sample& s);
Sample sample_from_json(const nlohmann::json& j);
// Throws ParseError carrying the 1-based line number.
std::vector<Sample> load_jsonl(const std::filesystem::path& path);

}  // namespace mpgui::data
