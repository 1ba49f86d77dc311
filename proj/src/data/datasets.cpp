// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/data/datasets.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "mpgui/data/templates.hpp"
#include "mpgui/errors.hpp"
#include "mpgui/rng.hpp"

namespace mpgui::data {

namespace {

using nlohmann::json;

json box_json(const BBox& b) { return {b.x_left, b.y_top, b.x_right, b.y_bottom}; }

Sample make_sample(const Scene& scene, std::string_view task, TemplateId tid,
                   const TemplateArgs& args, std::string target, std::vector<int> nodes) {
  Sample s;
  s.task = std::string(task);
  s.image = image_ref(scene.seed);
  s.prompt = instantiate(tid, args);
  s.target = std::move(target);
  s.meta["seed"] = scene.seed;
  s.meta["nodes"] = nodes;
  s.meta["template"] = std::string(get_template(tid).key);
  s.meta["W"] = scene.width;
  s.meta["H"] = scene.height;
  return s;
}

std::string scaled(const Scene& scene, const BBox& px) {
  return format_box(scale_box(px, scene.width, scene.height));
}

bool is_leaf(const VHNode& n) { return n.kind != NodeKind::Container; }

long long inter_area(const BBox& a, const BBox& b) {
  const long long w = std::min(a.x_right, b.x_right) - std::max(a.x_left, b.x_left);
  const long long h = std::min(a.y_bottom, b.y_bottom) - std::max(a.y_top, b.y_top);
  return w > 0 && h > 0 ? w * h : 0;
}

// IoU(a, b) <= num / den without floating point.
bool iou_at_most(const BBox& a, const BBox& b, long long num, long long den) {
  const long long inter = inter_area(a, b);
  const long long uni = a.area() + b.area() - inter;
  return den * inter <= num * uni;
}

long long centroid_dist2(const BBox& a, const BBox& b) {
  const long long dx = (a.x_left + a.x_right) - (b.x_left + b.x_right);
  const long long dy = (a.y_top + a.y_bottom) - (b.y_top + b.y_bottom);
  return dx * dx + dy * dy;
}

std::vector<const VHNode*> leaves(const std::vector<NodeRef>& flat) {
  std::vector<const VHNode*> out;
  for (const auto& r : flat) {
    if (is_leaf(*r.node)) out.push_back(r.node);
  }
  return out;
}

std::string local_relation(const std::vector<NodeRef>& flat, const VHNode& n) {
  const int parent = flat[n.id].parent;
  const VHNode& p = *flat[parent].node;
  const VHNode* best = nullptr;
  auto rank = [](const VHNode* c) { return c->kind == NodeKind::Text ? 0 : 1; };
  for (const auto& c : p.children) {
    if (c.id == n.id || !is_leaf(c)) continue;
    if (best == nullptr ||
        std::make_tuple(rank(&c), centroid_dist2(c.bbox, n.bbox), c.id) <
            std::make_tuple(rank(best), centroid_dist2(best->bbox, n.bbox), best->id)) {
      best = &c;
    }
  }
  if (best != nullptr) return "next to " + describe_leaf(*best);
  if (parent != 0) return "inside a group of " + std::to_string(p.children.size()) + " elements";
  return "with no related components nearby";
}

}  // namespace

bool is_task(std::string_view task) {
  return task == kTaskText2Bbox || task == kTaskBbox2Text || task == kTaskSrp ||
         task == kTaskSpe || task == kTaskMpe || task == kTaskLocalDesc;
}

std::string sample_id(const Sample& s) {
  std::string id = std::to_string(s.meta.at("seed").get<std::uint64_t>()) + ":" + s.task + ":" +
                   s.meta.at("template").get<std::string>() + ":";
  bool first = true;
  for (const auto& n : s.meta.at("nodes")) {
    if (!first) id += ".";
    id += std::to_string(n.get<int>());
    first = false;
  }
  if (s.meta.contains("srp_type")) id += ":t" + std::to_string(s.meta["srp_type"].get<int>());
  if (s.meta.contains("subset")) id += ":" + s.meta["subset"].get<std::string>();
  return id;
}

void sort_samples(std::vector<Sample>& samples) {
  auto key = [](const Sample& s) {
    const auto& nodes = s.meta.at("nodes");
    const int first = nodes.empty() ? -1 : nodes.front().get<int>();
    return std::make_tuple(s.meta.at("seed").get<std::uint64_t>(), s.task, first, sample_id(s));
  };
  std::stable_sort(samples.begin(), samples.end(),
                   [&](const Sample& a, const Sample& b) { return key(a) < key(b); });
}

std::string image_ref(std::uint64_t seed) { return "images/" + std::to_string(seed) + ".pgm"; }

std::string marked_image_ref(std::uint64_t seed, int node_id) {
  return "images/" + std::to_string(seed) + "_mark" + std::to_string(node_id) + ".pgm";
}

std::string describe_leaf(const VHNode& n) {
  if (n.kind == NodeKind::Icon) return n.content + " icon";
  return n.content;
}

std::vector<Sample> build_tad(const Scene& scene) {
  std::vector<Sample> out;
  for (const auto& r : scene.flatten()) {
    const VHNode& n = *r.node;
    if (n.kind != NodeKind::Text) continue;
    const std::string box = scaled(scene, n.bbox);
    out.push_back(make_sample(scene, kTaskText2Bbox, TemplateId::Text2Bbox, {.ref = n.content},
                              box, {n.id}));
    out.back().meta["px"] = box_json(n.bbox);
    out.push_back(make_sample(scene, kTaskBbox2Text, TemplateId::Bbox2Text, {.bbox = box},
                              n.content, {n.id}));
  }
  return out;
}

std::vector<Sample> build_gad(const Scene& scene) {
  std::vector<Sample> out;
  for (const auto& r : scene.flatten()) {
    const VHNode& n = *r.node;
    if (n.kind != NodeKind::Icon) continue;
    const std::string box = scaled(scene, n.bbox);
    const std::string name = describe_leaf(n);
    const double ratio = small_object_ratio(n.bbox, scene.width, scene.height);
    const bool small = ratio <= kSmallObjectPercent;
    for (const char* subset : {"general", "small"}) {
      if (std::string_view(subset) == "small" && !small) continue;
      auto a = make_sample(scene, kTaskText2Bbox, TemplateId::Text2Bbox, {.ref = name}, box,
                           {n.id});
      a.meta["px"] = box_json(n.bbox);
      auto b = make_sample(scene, kTaskBbox2Text, TemplateId::Bbox2Text, {.bbox = box}, name,
                           {n.id});
      for (auto* s : {&a, &b}) {
        s->meta["subset"] = subset;
        s->meta["ratio"] = ratio;
        out.push_back(std::move(*s));
      }
    }
  }
  return out;
}

bool type3_bounds_ok(const BBox& expanded, const BBox& original, const BBox& parent) {
  return iou_at_most(expanded, original, 1, 10) && iou_at_most(expanded, parent, 3, 10);
}

std::vector<Sample> build_srp(const Scene& scene, const SrpConfig& cfg, std::uint64_t seed,
                              SrpStats* stats) {
  if (cfg.cap_per_type < 1 || cfg.max_retries < 1) {
    throw ConfigError("srp: cap_per_type and max_retries must be >= 1");
  }
  const auto flat = scene.flatten();
  auto rng = make_rng(seed, "srp/" + std::to_string(scene.seed));
  using Pair = std::pair<int, int>;
  std::array<std::vector<Pair>, 4> cand;

  auto parent_of = [&](int id) { return flat[id].parent; };
  for (const auto& r : flat) {
    const VHNode& n = *r.node;
    if (n.id != 0) {
      for (const auto& c : n.children) cand[0].push_back({n.id, c.id});
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      for (std::size_t j = i + 1; j < n.children.size(); ++j) {
        cand[1].push_back({n.children[i].id, n.children[j].id});
      }
    }
  }
  for (std::size_t a = 1; a < flat.size(); ++a) {
    for (std::size_t b = a + 1; b < flat.size(); ++b) {
      const int ia = static_cast<int>(a), ib = static_cast<int>(b);
      if (parent_of(ia) == ib || parent_of(ib) == ia || parent_of(ia) == parent_of(ib)) continue;
      const BBox& ba = flat[a].node->bbox;
      const BBox& bb = flat[b].node->bbox;
      if (ba.contains(bb) || bb.contains(ba)) continue;
      cand[3].push_back({ia, ib});
    }
  }
  for (int t : {0, 1, 3}) std::shuffle(cand[t].begin(), cand[t].end(), rng);

  // Containment negatives: expand a node's box until it barely overlaps the
  // original and its parent.
  std::vector<int> nodes3;
  for (std::size_t i = 1; i < flat.size(); ++i) nodes3.push_back(static_cast<int>(i));
  std::shuffle(nodes3.begin(), nodes3.end(), rng);

  const int avail_cap = static_cast<int>(std::min({cand[0].size(), cand[1].size(),
                                                   cand[3].size(), nodes3.size()}));
  const int n = std::min(cfg.cap_per_type, avail_cap);
  const int W = scene.width, H = scene.height;
  std::vector<std::pair<int, BBox>> type3;
  int skipped = 0;
  for (int id : nodes3) {
    if (static_cast<int>(type3.size()) >= n) break;
    const BBox& o = flat[id].node->bbox;
    const BBox& p = flat[parent_of(id)].node->bbox;
    bool found = false;
    for (int k = 0; k < cfg.max_retries && !found; ++k) {
      const int ew = std::uniform_int_distribution<int>(o.width(), W)(rng);
      const int eh = std::uniform_int_distribution<int>(o.height(), H)(rng);
      const int l = std::uniform_int_distribution<int>(std::max(0, o.x_right - ew),
                                                       std::min(o.x_left, W - ew))(rng);
      const int t = std::uniform_int_distribution<int>(std::max(0, o.y_bottom - eh),
                                                       std::min(o.y_top, H - eh))(rng);
      const BBox e{l, t, l + ew, t + eh};
      if (!type3_bounds_ok(e, o, p)) continue;
      if (!type3_bounds_ok(scale_box(e, W, H), scale_box(o, W, H), scale_box(p, W, H))) continue;
      type3.push_back({id, e});
      found = true;
    }
    if (!found) ++skipped;
  }
  const int per_type = std::min<int>(n, static_cast<int>(type3.size()));

  std::vector<Sample> out;
  auto emit = [&](int type, const BBox& a, const BBox& b, std::vector<int> ids, json extra) {
    auto s = make_sample(scene, kTaskSrp, TemplateId::Srp,
                         {.bbox = scaled(scene, a), .bbox2 = scaled(scene, b)},
                         std::string(kSrpLabels[type - 1]), std::move(ids));
    s.meta["srp_type"] = type;
    for (auto& [k, v] : extra.items()) s.meta[k] = v;
    out.push_back(std::move(s));
  };
  for (int i = 0; i < per_type; ++i) {
    const auto [p1, c1] = cand[0][i];
    emit(1, flat[p1].node->bbox, flat[c1].node->bbox, {p1, c1}, json::object());
    const auto [s1, s2] = cand[1][i];
    emit(2, flat[s1].node->bbox, flat[s2].node->bbox, {s1, s2}, json::object());
    const auto& [id3, e] = type3[i];
    emit(3, e, flat[id3].node->bbox, {id3},
         {{"expanded_px", box_json(e)},
          {"original_px", box_json(flat[id3].node->bbox)},
          {"parent_px", box_json(flat[parent_of(id3)].node->bbox)},
          {"parent", parent_of(id3)}});
    const auto [a4, b4] = cand[3][i];
    emit(4, flat[a4].node->bbox, flat[b4].node->bbox, {a4, b4},
         {{"overlap", inter_area(flat[a4].node->bbox, flat[b4].node->bbox) > 0}});
  }
  if (stats != nullptr) {
    for (int t = 0; t < 4; ++t) stats->emitted[t] += per_type;
    stats->type3_skipped += skipped;
  }
  return out;
}

std::string location_phrase(const BBox& px, int width, int height) {
  if (width <= 0 || height <= 0) throw InputError("location_phrase: zero screen dimension");
  static constexpr std::string_view rows[3] = {"top", "middle", "bottom"};
  static constexpr std::string_view cols[3] = {"left", "center", "right"};
  // centroid * 3 / extent, with the centroid kept at twice its value
  const int col = std::clamp((3LL * (px.x_left + px.x_right)) / (2LL * width), 0LL, 2LL);
  const int row = std::clamp((3LL * (px.y_top + px.y_bottom)) / (2LL * height), 0LL, 2LL);
  if (row == 1 && col == 1) return "center";
  return std::string(rows[row]) + " " + std::string(cols[col]);
}

std::vector<Sample> build_synth_qa(const Scene& scene, QaKind kind) {
  const auto flat = scene.flatten();
  const auto leaf = leaves(flat);
  std::vector<Sample> out;
  if (kind == QaKind::Spe) {
    std::map<std::string, int> name_count;
    for (const auto* n : leaf) ++name_count[describe_leaf(*n)];
    for (const auto* n : leaf) {
      const std::string box = scaled(scene, n->bbox);
      if (n->kind == NodeKind::Text) {
        out.push_back(make_sample(scene, kTaskSpe, TemplateId::SpeText, {.bbox = box},
                                  n->content, {n->id}));
      } else {
        out.push_back(make_sample(scene, kTaskSpe, TemplateId::SpeIcon, {.bbox = box},
                                  n->content, {n->id}));
      }
      // Location questions need an unambiguous reference.
      const std::string name = describe_leaf(*n);
      if (name_count[name] == 1) {
        out.push_back(make_sample(scene, kTaskSpe, TemplateId::SpeLocation, {.ref = name},
                                  location_phrase(n->bbox, scene.width, scene.height),
                                  {n->id}));
      }
    }
    return out;
  }

  std::vector<const VHNode*> scan = leaf;
  std::sort(scan.begin(), scan.end(), [](const VHNode* a, const VHNode* b) {
    return std::make_tuple(a->bbox.y_top, a->bbox.x_left, a->id) <
           std::make_tuple(b->bbox.y_top, b->bbox.x_left, b->id);
  });
  if (!scan.empty()) {
    std::string desc = "screen with ";
    std::vector<int> ids;
    for (std::size_t i = 0; i < scan.size(); ++i) {
      if (i > 0) desc += ", ";
      desc += describe_leaf(*scan[i]);
      ids.push_back(scan[i]->id);
    }
    out.push_back(make_sample(scene, kTaskMpe, TemplateId::GlobalDesc, {}, desc, ids));
  }
  for (const auto* n : leaf) {
    auto s = make_sample(scene, kTaskLocalDesc, TemplateId::LocalDesc,
                         {.bbox = scaled(scene, n->bbox)},
                         "marked " + describe_leaf(*n) + ", " + local_relation(flat, *n),
                         {n->id});
    s.image = marked_image_ref(scene.seed, n->id);
    s.meta["mark"] = box_json(n->bbox);
    out.push_back(std::move(s));
  }
  return out;
}

GrayImage render_marks(const GrayImage& raster, const BBox& px) {
  if (!px.valid() || px.x_left < 0 || px.y_top < 0 || px.x_right > raster.width ||
      px.y_bottom > raster.height) {
    throw InputError("render_marks: box " + format_box(px) + " outside " +
                     std::to_string(raster.width) + "x" + std::to_string(raster.height));
  }
  GrayImage out = raster;
  for (int x = px.x_left; x < px.x_right; ++x) {
    out.at(x, px.y_top) = kMarkIntensity;
    out.at(x, px.y_bottom - 1) = kMarkIntensity;
  }
  for (int y = px.y_top; y < px.y_bottom; ++y) {
    out.at(px.x_left, y) = kMarkIntensity;
    out.at(px.x_right - 1, y) = kMarkIntensity;
  }
  return out;
}

GrayImage sample_image(const Scene& scene, const Sample& s) {
  if (!s.meta.contains("mark")) return scene.raster;
  const auto& m = s.meta.at("mark");
  return render_marks(scene.raster,
                      {m.at(0).get<int>(), m.at(1).get<int>(), m.at(2).get<int>(),
                       m.at(3).get<int>()});
}

std::string to_jsonl_line(const Sample& s) {
  const json j = {{"task", s.task},
                  {"image", s.image},
                  {"prompt", s.prompt},
                  {"target", s.target},
                  {"meta", s.meta}};
  return j.dump();
}

Sample sample_from_json(const json& j) {
  Sample s;
  s.task = j.at("task").get<std::string>();
  if (!is_task(s.task)) throw InputError("unknown task '" + s.task + "'");
  s.image = j.at("image").get<std::string>();
  s.prompt = j.at("prompt").get<std::string>();
  s.target = j.at("target").get<std::string>();
  s.meta = j.at("meta");
  if (!s.meta.is_object()) throw InputError("meta must be an object");
  return s;
}

void serialize_jsonl(const std::vector<Sample>& samples, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  for (const auto& s : samples) f << to_jsonl_line(s) << '\n';
  if (!f) throw InputError("write failed for " + path.string());
}

std::vector<Sample> load_jsonl(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read " + path.string());
  std::vector<Sample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(sample_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    } catch (const InputError& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
  }
  return out;
}

}  // namespace mpgui::data
