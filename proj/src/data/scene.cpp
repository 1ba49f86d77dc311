// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/data/scene.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "mpgui/errors.hpp"
#include "mpgui/rng.hpp"

namespace mpgui::data {

namespace {

constexpr std::array<IconCode, 14> kIcons{{
    {"home", "..#...###.#####.#.#..###."},
    {"back", "..#...#...#####.#.....#.."},
    {"search", ".###.#...#.###.....#....#"},
    {"menu", "#####.....#####.....#####"},
    {"star", "..#..#####.###..#.#.#...#"},
    {"heart", ".#.#.######.###..###...#."},
    {"gear", "#.#.#.###.##.##.###.#.#.#"},
    {"bell", "..#...###..###.#####..#.."},
    {"user", ".###..###...#...###.#####"},
    {"mail", "######...##.#.##...######"},
    {"plus", "..#....#..#####..#....#.."},
    {"close", "#...#.#.#...#...#.#.#...#"},
    {"play", "#....##...###..##...#...."},
    {"lock", ".###.#...######.#.######."},
}};

constexpr int kGlyphW = 3;
constexpr int kGlyphH = 5;
constexpr int kGlyphPitch = kGlyphW + 1;
constexpr int kMargin = 2;
constexpr int kGap = 1;

// 3x5 glyph bitmap for a lowercase letter, derived from its code point.
std::uint16_t glyph_bits(char c) {
  std::uint16_t bits = static_cast<std::uint16_t>(splitmix64(static_cast<unsigned char>(c)) & 0x7fff);
  return bits == 0 ? 0x5555 & 0x7fff : bits;
}

void draw_outline(GrayImage& img, const BBox& b, std::uint8_t v) {
  for (int x = b.x_left; x < b.x_right; ++x) {
    img.at(x, b.y_top) = v;
    img.at(x, b.y_bottom - 1) = v;
  }
  for (int y = b.y_top; y < b.y_bottom; ++y) {
    img.at(b.x_left, y) = v;
    img.at(b.x_right - 1, y) = v;
  }
}

void draw_text(GrayImage& img, const VHNode& n) {
  const int x0 = n.bbox.x_left + 2;
  const int y0 = n.bbox.y_top + (n.bbox.height() - kGlyphH) / 2;
  for (std::size_t i = 0; i < n.content.size(); ++i) {
    const std::uint16_t bits = glyph_bits(n.content[i]);
    for (int gy = 0; gy < kGlyphH; ++gy) {
      for (int gx = 0; gx < kGlyphW; ++gx) {
        if (bits >> (gy * kGlyphW + gx) & 1) {
          const int x = x0 + static_cast<int>(i) * kGlyphPitch + gx;
          const int y = y0 + gy;
          if (x > n.bbox.x_left && x < n.bbox.x_right - 1 && y > n.bbox.y_top &&
              y < n.bbox.y_bottom - 1) {
            img.at(x, y) = kGlyphInk;
          }
        }
      }
    }
  }
}

void draw_icon(GrayImage& img, const VHNode& n) {
  const IconCode* code = nullptr;
  for (const auto& ic : kIcons) {
    if (ic.name == n.content) code = &ic;
  }
  if (code == nullptr) throw InputError("unknown icon code '" + n.content + "'");
  const int iw = n.bbox.width() - 2;
  const int ih = n.bbox.height() - 2;
  for (int y = 0; y < ih; ++y) {
    for (int x = 0; x < iw; ++x) {
      const int py = y * 5 / ih;
      const int px = x * 5 / iw;
      if (code->pattern[py * 5 + px] == '#') {
        img.at(n.bbox.x_left + 1 + x, n.bbox.y_top + 1 + y) = kIconInk;
      }
    }
  }
}

void render_node(GrayImage& img, const VHNode& n) {
  switch (n.kind) {
    case NodeKind::Container:
      draw_outline(img, n.bbox, kContainerBorder);
      break;
    case NodeKind::Text:
      draw_outline(img, n.bbox, kTextBorder);
      draw_text(img, n);
      break;
    case NodeKind::Icon:
      draw_outline(img, n.bbox, kIconBorder);
      draw_icon(img, n);
      break;
  }
  for (const auto& c : n.children) render_node(img, c);
}

class Layout {
 public:
  Layout(std::mt19937_64& rng, const GenConfig& cfg, int w, int h)
      : rng_(rng), cfg_(cfg), width_(w), height_(h) {}

  void fill(VHNode& node) {
    if (node.depth >= cfg_.max_depth) return;
    const BBox inner{node.bbox.x_left + kMargin, node.bbox.y_top + kMargin,
                     node.bbox.x_right - kMargin, node.bbox.y_bottom - kMargin};
    if (!inner.valid()) return;
    const int min_k = node.depth == 0 ? 2 : 1;
    int k = uniform(min_k, std::max(min_k, cfg_.max_children));
    const bool tall = inner.height() >= inner.width();
    const bool vertical = tall ? chance(0.75) : chance(0.25);
    const int extent = vertical ? inner.height() : inner.width();
    while (k > 1 && (extent - (k - 1) * kGap) / k < 7) --k;
    const int slot = (extent - (k - 1) * kGap) / k;
    if (slot < 5) return;
    for (int i = 0; i < k; ++i) {
      BBox s = inner;
      if (vertical) {
        s.y_top = inner.y_top + i * (slot + kGap);
        s.y_bottom = s.y_top + slot;
      } else {
        s.x_left = inner.x_left + i * (slot + kGap);
        s.x_right = s.x_left + slot;
      }
      place(node, s);
    }
  }

 private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

  BBox position(const BBox& slot, int w, int h) {
    const int x = uniform(slot.x_left, slot.x_right - w);
    const int y = uniform(slot.y_top, slot.y_bottom - h);
    return {x, y, x + w, y + h};
  }

  std::string random_text() {
    static constexpr std::string_view letters = "abcdefghijklmnopqrstuvwxyz";
    for (;;) {
      const int n = uniform(3, max_glyphs_);
      std::string s;
      for (int i = 0; i < n; ++i) s.push_back(letters[uniform(0, 25)]);
      if (!is_icon_name(s)) return s;
    }
  }

  void place(VHNode& parent, const BBox& slot) {
    VHNode child;
    child.depth = parent.depth + 1;
    const bool room_for_container = slot.width() >= 20 && slot.height() >= 16;
    if (child.depth < cfg_.max_depth && room_for_container && chance(cfg_.container_prob)) {
      const int dl = uniform(0, 1), dt = uniform(0, 1), dr = uniform(0, 1), db = uniform(0, 1);
      child.kind = NodeKind::Container;
      child.bbox = {slot.x_left + dl, slot.y_top + dt, slot.x_right - dr, slot.y_bottom - db};
      fill(child);
      parent.children.push_back(std::move(child));
      return;
    }
    const int fit_glyphs = (slot.width() - 3) / kGlyphPitch;
    if (fit_glyphs >= 3 && slot.height() >= 9 && chance(cfg_.text_prob)) {
      max_glyphs_ = std::min(10, fit_glyphs);
      child.kind = NodeKind::Text;
      child.content = random_text();
      const int h = uniform(9, std::min(11, slot.height()));
      child.bbox = position(slot, static_cast<int>(child.content.size()) * kGlyphPitch + 3, h);
      parent.children.push_back(std::move(child));
      return;
    }
    const int smax = std::min({slot.width(), slot.height(), 28});
    if (smax < 5) return;
    int side;
    if (cfg_.small_icons && chance(cfg_.tiny_icon_prob)) {
      side = uniform(5, std::min(6, smax));
    } else {
      side = uniform(std::min(8, smax), smax);
    }
    child.kind = NodeKind::Icon;
    child.content = std::string(kIcons[uniform(0, static_cast<int>(kIcons.size()) - 1)].name);
    child.bbox = position(slot, side, side);
    parent.children.push_back(std::move(child));
  }

  std::mt19937_64& rng_;
  const GenConfig& cfg_;
  int width_;
  int height_;
  int max_glyphs_ = 10;
};

void assign_ids(VHNode& n, int& next) {
  n.id = next++;
  for (auto& c : n.children) assign_ids(c, next);
}

void flatten_into(const VHNode& n, int parent, std::vector<NodeRef>& out) {
  out[n.id] = NodeRef{&n, parent};
  for (const auto& c : n.children) flatten_into(c, n.id, out);
}

int count_nodes(const VHNode& n) {
  int c = 1;
  for (const auto& ch : n.children) c += count_nodes(ch);
  return c;
}

bool has_small_icon(const VHNode& n, int w, int h) {
  if (n.kind == NodeKind::Icon && small_object_ratio(n.bbox, w, h) <= kSmallObjectPercent) {
    return true;
  }
  return std::any_of(n.children.begin(), n.children.end(),
                     [&](const VHNode& c) { return has_small_icon(c, w, h); });
}

bool has_leaf(const VHNode& n) {
  if (n.kind != NodeKind::Container) return true;
  return std::any_of(n.children.begin(), n.children.end(), has_leaf);
}

nlohmann::json node_to_json(const VHNode& n) {
  nlohmann::json children = nlohmann::json::array();
  for (const auto& c : n.children) children.push_back(node_to_json(c));
  return {{"id", n.id},
          {"bbox", {n.bbox.x_left, n.bbox.y_top, n.bbox.x_right, n.bbox.y_bottom}},
          {"kind", to_string(n.kind)},
          {"content", n.content},
          {"depth", n.depth},
          {"children", std::move(children)}};
}

VHNode node_from_json(const nlohmann::json& j) {
  VHNode n;
  n.id = j.at("id").get<int>();
  const auto& b = j.at("bbox");
  n.bbox = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
  n.kind = parse_node_kind(j.at("kind").get<std::string>());
  n.content = j.at("content").get<std::string>();
  n.depth = j.at("depth").get<int>();
  for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
  return n;
}

long long round_half_up_div(long long num, long long den) {
  // floor(num / den + 1/2) for non-negative num, positive den.
  return (2 * num + den) / (2 * den);
}

}  // namespace

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Container: return "container";
    case NodeKind::Text: return "text";
    case NodeKind::Icon: return "icon";
  }
  return "container";
}

NodeKind parse_node_kind(std::string_view s) {
  if (s == "container") return NodeKind::Container;
  if (s == "text") return NodeKind::Text;
  if (s == "icon") return NodeKind::Icon;
  throw InputError("unknown node kind '" + std::string(s) + "'");
}

std::vector<NodeRef> Scene::flatten() const {
  std::vector<NodeRef> out(static_cast<std::size_t>(count_nodes(root)));
  flatten_into(root, -1, out);
  return out;
}

void GenConfig::validate() const {
  if (min_width < 40 || min_height < 40 || max_width < min_width || max_height < min_height) {
    throw ConfigError("screen size range invalid (minimum 40x40)");
  }
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (max_children < 2) throw ConfigError("max_children must be >= 2");
  if (max_retries < 1) throw ConfigError("max_retries must be >= 1");
}

nlohmann::json to_json(const GenConfig& c) {
  return {{"min_width", c.min_width},       {"max_width", c.max_width},
          {"min_height", c.min_height},     {"max_height", c.max_height},
          {"max_depth", c.max_depth},       {"max_children", c.max_children},
          {"small_icons", c.small_icons},   {"container_prob", c.container_prob},
          {"text_prob", c.text_prob},       {"tiny_icon_prob", c.tiny_icon_prob},
          {"max_retries", c.max_retries}};
}

GenConfig gen_config_from_json(const nlohmann::json& j) {
  GenConfig c;
  auto read = [&](const char* k, auto& field) {
    if (j.contains(k)) field = j.at(k).get<std::decay_t<decltype(field)>>();
  };
  read("min_width", c.min_width);
  read("max_width", c.max_width);
  read("min_height", c.min_height);
  read("max_height", c.max_height);
  read("max_depth", c.max_depth);
  read("max_children", c.max_children);
  read("small_icons", c.small_icons);
  read("container_prob", c.container_prob);
  read("text_prob", c.text_prob);
  read("tiny_icon_prob", c.tiny_icon_prob);
  read("max_retries", c.max_retries);
  c.validate();
  return c;
}

std::span<const IconCode> icon_codes() { return kIcons; }

bool is_icon_name(std::string_view s) {
  return std::any_of(kIcons.begin(), kIcons.end(), [&](const IconCode& c) { return c.name == s; });
}

GrayImage render_scene(int width, int height, const VHNode& root) {
  GrayImage img(width, height, 0);
  render_node(img, root);
  return img;
}

Scene gen_screen(std::uint64_t seed, const GenConfig& cfg) {
  cfg.validate();
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    auto rng = make_rng(seed, "scene/" + std::to_string(attempt));
    Scene s;
    s.seed = seed;
    s.width = std::uniform_int_distribution<int>(cfg.min_width, cfg.max_width)(rng);
    s.height = std::uniform_int_distribution<int>(cfg.min_height, cfg.max_height)(rng);
    s.root.kind = NodeKind::Container;
    s.root.bbox = {0, 0, s.width, s.height};
    s.root.depth = 0;
    Layout layout(rng, cfg, s.width, s.height);
    layout.fill(s.root);
    if (!has_leaf(s.root)) continue;
    if (cfg.small_icons && !has_small_icon(s.root, s.width, s.height)) continue;
    int next = 0;
    assign_ids(s.root, next);
    s.raster = render_scene(s.width, s.height, s.root);
    return s;
  }
  throw GenerationError("gen_screen: no feasible layout for seed " + std::to_string(seed) +
                        " after " + std::to_string(cfg.max_retries) + " attempts");
}

nlohmann::json scene_to_json(const Scene& s) {
  return {{"W", s.width}, {"H", s.height}, {"seed", s.seed}, {"root", node_to_json(s.root)}};
}

Scene scene_from_json(const nlohmann::json& j) {
  Scene s;
  s.width = j.at("W").get<int>();
  s.height = j.at("H").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.root = node_from_json(j.at("root"));
  s.raster = render_scene(s.width, s.height, s.root);
  return s;
}

BBox scale_box(const BBox& px, int width, int height) {
  if (width <= 0 || height <= 0) throw InputError("scale_box: zero screen dimension");
  auto sx = [&](int v) {
    return static_cast<int>(std::clamp<long long>(round_half_up_div(1000LL * v, width), 0, 1000));
  };
  auto sy = [&](int v) {
    return static_cast<int>(std::clamp<long long>(round_half_up_div(1000LL * v, height), 0, 1000));
  };
  return {sx(px.x_left), sy(px.y_top), sx(px.x_right), sy(px.y_bottom)};
}

BBox unscale_box(const BBox& s, int width, int height) {
  if (width <= 0 || height <= 0) throw InputError("unscale_box: zero screen dimension");
  auto ux = [&](int v) { return static_cast<int>(round_half_up_div(1LL * v * width, 1000)); };
  auto uy = [&](int v) { return static_cast<int>(round_half_up_div(1LL * v * height, 1000)); };
  return {ux(s.x_left), uy(s.y_top), ux(s.x_right), uy(s.y_bottom)};
}

double small_object_ratio(const BBox& px, int width, int height) {
  if (width <= 0 || height <= 0) throw InputError("small_object_ratio: zero screen dimension");
  const double w = px.x_right - px.x_left;
  const double h = px.y_bottom - px.y_top;
  return w * h / (static_cast<double>(width) * height) * 100.0;
}

}  // namespace mpgui::data
