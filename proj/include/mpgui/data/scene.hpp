// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <span>
#include <vector>

#include <json.hpp>

#include "mpgui/bbox.hpp"
#include "mpgui/image.hpp"

namespace mpgui::data {

enum class NodeKind { Container, Text, Icon };

std::string_view to_string(NodeKind k);
NodeKind parse_node_kind(std::string_view s);

// One view-hierarchy element. Children lie inside the parent box, siblings do
// not overlap, depth(child) = depth(parent) + 1. Ids are pre-order indices.
struct VHNode {
  int id = 0;
  BBox bbox;
  NodeKind kind = NodeKind::Container;
  std::string content;  // glyph string (text) or icon name (icon)
  int depth = 0;
  std::vector<VHNode> children;

  bool operator==(const VHNode&) const = default;
};

// Flattened view of one node with its parent link.
struct NodeRef {
  const VHNode* node = nullptr;
  int parent = -1;  // id, -1 for the root
};

struct Scene {
  int width = 0;
  int height = 0;
  std::uint64_t seed = 0;
  VHNode root;
  GrayImage raster;

  // Indexed by node id.
  std::vector<NodeRef> flatten() const;
};

struct GenConfig {
  int min_width = 90;
  int max_width = 120;
  int min_height = 150;
  int max_height = 200;
  int max_depth = 3;
  int max_children = 4;
  bool small_icons = true;
  double container_prob = 0.55;
  double text_prob = 0.5;
  double tiny_icon_prob = 0.35;
  int max_retries = 16;

  void validate() const;
};

nlohmann::json to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const nlohmann::json& j);

// Raster intensities. kMarkIntensity is reserved for drawn marks.
inline constexpr std::uint8_t kContainerBorder = 70;
inline constexpr std::uint8_t kTextBorder = 110;
inline constexpr std::uint8_t kGlyphInk = 200;
inline constexpr std::uint8_t kIconBorder = 150;
inline constexpr std::uint8_t kIconInk = 230;
inline constexpr std::uint8_t kMarkIntensity = 255;

// Closed vocabulary of icon codes, each with a 5x5 binary pattern.
struct IconCode {
  std::string_view name;
  std::string_view pattern;  // 25 chars of '#' / '.', row-major
};
std::span<const IconCode> icon_codes();
bool is_icon_name(std::string_view s);

Scene gen_screen(std::uint64_t seed, const GenConfig& cfg);
GrayImage render_scene(int width, int height, const VHNode& root);

// Nested JSON mirroring VHNode, wrapped as {W, H, seed, root}.
nlohmann::json scene_to_json(const Scene& s);
// Re-renders the raster from the tree.
Scene scene_from_json(const nlohmann::json& j);

// Pixel box -> [0,1000] frame: x * 1000 / W, y * 1000 / H, rounded half up,
// clamped.
BBox scale_box(const BBox& px, int width, int height);
// Inverse mapping, rounded half up.
BBox unscale_box(const BBox& scaled, int width, int height);
// (w*h) / (W*H) * 100.
double small_object_ratio(const BBox& px, int width, int height);

inline constexpr double kSmallObjectPercent = 0.3;

}  // namespace mpgui::data
