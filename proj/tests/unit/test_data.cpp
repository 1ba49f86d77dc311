// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "mpgui/data/datasets.hpp"
#include "mpgui/data/scene.hpp"
#include "mpgui/data/templates.hpp"
#include "mpgui/errors.hpp"

using namespace mpgui;
using namespace mpgui::data;

namespace {

std::filesystem::path tmp_path(const std::string& name) {
  std::filesystem::create_directories(MPGUI_TEST_TMP);
  return std::filesystem::path(MPGUI_TEST_TMP) / name;
}

bool overlaps(const BBox& a, const BBox& b) {
  return std::max(a.x_left, b.x_left) < std::min(a.x_right, b.x_right) &&
         std::max(a.y_top, b.y_top) < std::min(a.y_bottom, b.y_bottom);
}

// IoU from explicit pixel counting, for small boxes.
double raster_iou(const BBox& a, const BBox& b) {
  long long inter = 0, uni = 0;
  const int x0 = std::min(a.x_left, b.x_left), x1 = std::max(a.x_right, b.x_right);
  const int y0 = std::min(a.y_top, b.y_top), y1 = std::max(a.y_bottom, b.y_bottom);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool ia = x >= a.x_left && x < a.x_right && y >= a.y_top && y < a.y_bottom;
      const bool ib = x >= b.x_left && x < b.x_right && y >= b.y_top && y < b.y_bottom;
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

void check_tree(const VHNode& n, int depth) {
  CHECK(n.depth == depth);
  CHECK(n.bbox.valid());
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    CHECK(n.bbox.contains(n.children[i].bbox));
    for (std::size_t j = i + 1; j < n.children.size(); ++j)
      CHECK_FALSE(overlaps(n.children[i].bbox, n.children[j].bbox));
    check_tree(n.children[i], depth + 1);
  }
  if (n.kind != NodeKind::Container) {
    CHECK(n.children.empty());
    CHECK_FALSE(n.content.empty());
  }
  if (n.kind == NodeKind::Icon) CHECK(is_icon_name(n.content));
  if (n.kind == NodeKind::Text) CHECK_FALSE(is_icon_name(n.content));
}

BBox box_of(const nlohmann::json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

}  // namespace

TEST_CASE("generated screens satisfy the tree invariants") {
  const GenConfig cfg;
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    CAPTURE(seed);
    const Scene s = gen_screen(seed, cfg);
    CHECK(s.width >= cfg.min_width);
    CHECK(s.width <= cfg.max_width);
    CHECK(s.raster.width == s.width);
    CHECK(s.raster.height == s.height);
    CHECK(s.root.bbox == BBox{0, 0, s.width, s.height});
    check_tree(s.root, 0);
    const auto flat = s.flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      CHECK(flat[i].node->id == static_cast<int>(i));
      CHECK(flat[i].node->depth <= cfg.max_depth);
      if (i > 0) CHECK(flat[i].parent < static_cast<int>(i));
    }
    bool small = false;
    for (const auto& r : flat)
      if (r.node->kind == NodeKind::Icon &&
          small_object_ratio(r.node->bbox, s.width, s.height) <= kSmallObjectPercent)
        small = true;
    CHECK(small);
  }
}

TEST_CASE("generation is seeded and scenes survive a JSON round trip") {
  const GenConfig cfg;
  const Scene a = gen_screen(42, cfg), b = gen_screen(42, cfg), c = gen_screen(43, cfg);
  CHECK(a.root == b.root);
  CHECK(a.raster == b.raster);
  CHECK_FALSE(a.root == c.root);
  const Scene back = scene_from_json(scene_to_json(a));
  CHECK(back.root == a.root);
  CHECK(back.raster == a.raster);
  CHECK(back.seed == a.seed);
}

TEST_CASE("generator config validation") {
  GenConfig c;
  c.min_width = 30;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GenConfig{};
  c.max_children = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GenConfig{};
  c.max_width = c.min_width - 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GenConfig{};
  c.max_depth = 5;
  c.container_prob = 0.9;
  const GenConfig back = gen_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("box scaling rounds half up into the 0..1000 frame") {
  CHECK(scale_box({0, 0, 50, 100}, 100, 100) == BBox{0, 0, 500, 1000});
  CHECK(scale_box({1, 1, 2, 2}, 3, 16) == BBox{333, 63, 667, 125});
  CHECK(scale_box({1, 0, 7, 1}, 8, 2000) == BBox{125, 0, 875, 1});
  CHECK_THROWS_AS(scale_box({0, 0, 1, 1}, 0, 10), InputError);
  for (int w = 40; w <= 200; w += 7) {
    for (int x = 0; x <= w; x += 3) {
      const BBox px{x, 0, w, w};
      const BBox back = unscale_box(scale_box(px, w, w), w, w);
      CHECK(std::abs(back.x_left - x) <= 1);
      CHECK(back.x_right == w);
    }
  }
  CHECK(small_object_ratio({0, 0, 10, 10}, 100, 100) == doctest::Approx(1.0));
  CHECK(small_object_ratio({0, 0, 5, 6}, 100, 100) == doctest::Approx(0.3));
}

TEST_CASE("box text format") {
  CHECK(format_box({1, 2, 30, 400}) == "[1,2,30,400]");
  CHECK(parse_box("it is at [ 1, 2 ,30,400] ok") == BBox{1, 2, 30, 400});
  CHECK_FALSE(parse_box("[1,2,3]").has_value());
  CHECK_FALSE(parse_box("nothing").has_value());
}

TEST_CASE("templates instantiate and keep the image placeholder") {
  for (const auto& t : all_templates()) {
    const std::string p = instantiate(t.id, {.ref = "ok", .bbox = "[0,0,1,1]", .bbox2 = "[1,1,2,2]"});
    CHECK(p.rfind(std::string(kImagePlaceholder), 0) == 0);
    CHECK(p.find('{') == std::string::npos);
    CHECK(question_text(p).size() + kImagePlaceholder.size() == p.size());
  }
  CHECK_THROWS_AS(get_template("nope"), ContractError);
}

TEST_CASE("TAD pairs every text leaf both ways") {
  const Scene s = gen_screen(5, GenConfig{});
  const auto tad = build_tad(s);
  std::size_t texts = 0;
  for (const auto& r : s.flatten()) texts += r.node->kind == NodeKind::Text;
  CHECK(tad.size() == 2 * texts);
  const auto flat = s.flatten();
  for (const auto& smp : tad) {
    const VHNode& n = *flat[smp.meta["nodes"][0].get<int>()].node;
    CHECK(n.kind == NodeKind::Text);
    if (smp.task == kTaskText2Bbox) {
      CHECK(smp.target == format_box(scale_box(n.bbox, s.width, s.height)));
      CHECK(smp.prompt.find(n.content) != std::string::npos);
      CHECK(box_of(smp.meta["px"]) == n.bbox);
    } else {
      CHECK(smp.task == kTaskBbox2Text);
      CHECK(smp.target == n.content);
    }
  }
}

TEST_CASE("GAD small subset holds exactly the small icons") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Scene s = gen_screen(seed, GenConfig{});
    const auto gad = build_gad(s);
    std::set<int> small_expected, small_got, general;
    for (const auto& r : s.flatten()) {
      if (r.node->kind != NodeKind::Icon) continue;
      const BBox& b = r.node->bbox;
      // 100 * w*h <= 0.3 * W*H, as integers
      if (1000LL * b.width() * b.height() <= 3LL * s.width * s.height) small_expected.insert(r.node->id);
    }
    for (const auto& smp : gad) {
      const int id = smp.meta["nodes"][0].get<int>();
      if (smp.meta["subset"] == "small") small_got.insert(id);
      else general.insert(id);
    }
    CHECK(small_got == small_expected);
    for (int id : small_got) CHECK(general.count(id) == 1);
  }
}

TEST_CASE("containment-negative bounds on hand examples") {
  const BBox parent{0, 0, 100, 100};
  const BBox orig{40, 40, 50, 50};
  CHECK(type3_bounds_ok({0, 0, 100, 100}, orig, {0, 0, 1000, 1000}));
  CHECK_FALSE(type3_bounds_ok({0, 0, 100, 100}, orig, parent));
  // 100 / 1000 = 0.1 exactly, still allowed
  CHECK(type3_bounds_ok({40, 40, 140, 50}, orig, {0, 0, 1000, 1000}));
  CHECK_FALSE(type3_bounds_ok({40, 40, 139, 50}, orig, {0, 0, 1000, 1000}));
}

TEST_CASE("SRP samples obey their type definitions") {
  SrpStats stats;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    CAPTURE(seed);
    const Scene s = gen_screen(seed, GenConfig{});
    const auto flat = s.flatten();
    const auto srp = build_srp(s, SrpConfig{}, 7, &stats);
    int counts[4] = {0, 0, 0, 0};
    for (const auto& smp : srp) {
      const int t = smp.meta["srp_type"].get<int>();
      ++counts[t - 1];
      CHECK(smp.target == kSrpLabels[t - 1]);
      const auto ids = smp.meta["nodes"];
      if (t == 1) {
        CHECK(flat[ids[1].get<int>()].parent == ids[0].get<int>());
        CHECK(ids[0].get<int>() != 0);
      } else if (t == 2) {
        CHECK(flat[ids[0].get<int>()].parent == flat[ids[1].get<int>()].parent);
      } else if (t == 3) {
        const BBox e = box_of(smp.meta["expanded_px"]);
        const BBox o = box_of(smp.meta["original_px"]);
        const BBox p = box_of(smp.meta["parent_px"]);
        CHECK(e.contains(o));
        CHECK(raster_iou(e, o) <= 0.1 + 1e-12);
        CHECK(raster_iou(e, p) <= 0.3 + 1e-12);
        CHECK(o == flat[ids[0].get<int>()].node->bbox);
      } else {
        const int a = ids[0].get<int>(), b = ids[1].get<int>();
        CHECK(flat[a].parent != b);
        CHECK(flat[b].parent != a);
        CHECK(flat[a].parent != flat[b].parent);
        CHECK_FALSE(flat[a].node->bbox.contains(flat[b].node->bbox));
        CHECK_FALSE(flat[b].node->bbox.contains(flat[a].node->bbox));
      }
    }
    CHECK(counts[0] == counts[1]);
    CHECK(counts[1] == counts[2]);
    CHECK(counts[2] == counts[3]);
    CHECK(counts[0] <= SrpConfig{}.cap_per_type);
  }
  CHECK(stats.emitted[0] > 0);
  CHECK_THROWS_AS(build_srp(gen_screen(1, GenConfig{}), {.cap_per_type = 0}, 7), ConfigError);
}

TEST_CASE("location phrases use thirds of the screen") {
  CHECK(location_phrase({0, 0, 10, 10}, 90, 90) == "top left");
  CHECK(location_phrase({40, 40, 50, 50}, 90, 90) == "center");
  CHECK(location_phrase({80, 0, 90, 10}, 90, 90) == "top right");
  CHECK(location_phrase({40, 80, 50, 90}, 90, 90) == "bottom center");
  CHECK(location_phrase({0, 40, 10, 50}, 90, 90) == "middle left");
  // centroid at exactly one third goes to the middle band
  CHECK(location_phrase({25, 25, 35, 35}, 90, 90) == "center");
}

TEST_CASE("synthetic QA") {
  const Scene s = gen_screen(9, GenConfig{});
  const auto flat = s.flatten();
  std::vector<const VHNode*> leaves;
  for (const auto& r : flat)
    if (r.node->kind != NodeKind::Container) leaves.push_back(r.node);

  const auto spe = build_synth_qa(s, QaKind::Spe);
  for (const auto& smp : spe) {
    CHECK(smp.task == kTaskSpe);
    const VHNode& n = *flat[smp.meta["nodes"][0].get<int>()].node;
    if (smp.meta["template"] != "spe-location") CHECK(smp.target == n.content);
  }

  const auto mpe = build_synth_qa(s, QaKind::Mpe);
  REQUIRE_FALSE(mpe.empty());
  std::size_t local = 0;
  for (const auto& smp : mpe) {
    if (smp.task == kTaskMpe) {
      CHECK(smp.target.rfind("screen with ", 0) == 0);
      CHECK(smp.meta["nodes"].size() == leaves.size());
      // raster order: top edge, then left edge
      for (std::size_t i = 1; i < smp.meta["nodes"].size(); ++i) {
        const BBox& a = flat[smp.meta["nodes"][i - 1].get<int>()].node->bbox;
        const BBox& b = flat[smp.meta["nodes"][i].get<int>()].node->bbox;
        CHECK((a.y_top < b.y_top || (a.y_top == b.y_top && a.x_left <= b.x_left)));
      }
    } else {
      ++local;
      CHECK(smp.task == kTaskLocalDesc);
      CHECK(smp.target.rfind("marked ", 0) == 0);
      const GrayImage img = sample_image(s, smp);
      const BBox m = box_of(smp.meta["mark"]);
      CHECK(img.at(m.x_left, m.y_top) == kMarkIntensity);
      CHECK(smp.image == marked_image_ref(s.seed, smp.meta["nodes"][0].get<int>()));
    }
  }
  CHECK(local == leaves.size());
}

TEST_CASE("marks must stay inside the raster") {
  const GrayImage img(10, 10, 0);
  CHECK_THROWS_AS(render_marks(img, {5, 5, 11, 8}), InputError);
  CHECK_THROWS_AS(render_marks(img, {5, 5, 5, 8}), InputError);
  const GrayImage m = render_marks(img, {2, 2, 6, 6});
  CHECK(m.at(2, 2) == kMarkIntensity);
  CHECK(m.at(5, 5) == kMarkIntensity);
  CHECK(m.at(3, 3) == 0);
  CHECK(m.at(6, 6) == 0);
}

TEST_CASE("sample ids are unique within a scene") {
  const Scene s = gen_screen(12, GenConfig{});
  std::vector<Sample> all = build_tad(s);
  for (auto&& v : {build_gad(s), build_srp(s, SrpConfig{}, 1), build_synth_qa(s, QaKind::Spe),
                   build_synth_qa(s, QaKind::Mpe)})
    all.insert(all.end(), v.begin(), v.end());
  std::set<std::string> ids;
  for (const auto& smp : all) {
    CHECK(is_task(smp.task));
    CHECK(ids.insert(sample_id(smp)).second);
  }
}

TEST_CASE("JSONL round trip and parse errors") {
  const Scene s = gen_screen(3, GenConfig{});
  auto samples = build_tad(s);
  const auto gad = build_gad(s);
  samples.insert(samples.end(), gad.begin(), gad.end());
  sort_samples(samples);
  const auto path = tmp_path("round.jsonl");
  serialize_jsonl(samples, path);
  CHECK(load_jsonl(path) == samples);

  const auto bad = tmp_path("bad.jsonl");
  {
    std::ofstream f(bad);
    f << to_jsonl_line(samples[0]) << "\n" << to_jsonl_line(samples[1]) << "\n{broken\n";
  }
  try {
    (void)load_jsonl(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  nlohmann::json j = nlohmann::json::parse(to_jsonl_line(samples[0]));
  j["task"] = "captioning";
  CHECK_THROWS_AS(sample_from_json(j), InputError);
}

TEST_CASE("PGM round trip") {
  const Scene s = gen_screen(4, GenConfig{});
  const auto path = tmp_path("s.pgm");
  write_pgm(path, s.raster);
  CHECK(read_pgm(path) == s.raster);
  const auto bad = tmp_path("bad.pgm");
  std::ofstream(bad) << "P2\n1 1\n255\n0\n";
  CHECK_THROWS_AS(read_pgm(bad), InputError);
}

TEST_CASE("reference values for scaling and ratios") {
  CHECK(scale_box({100, 200, 300, 400}, 1000, 2000) == BBox{100, 100, 300, 200});
  CHECK(small_object_ratio({0, 0, 30, 20}, 1000, 2000) == doctest::Approx(0.03));
  CHECK(small_object_ratio({0, 0, 50, 100}, 1000, 1000) == doctest::Approx(0.5));
  CHECK(small_object_ratio({0, 0, 50, 100}, 1000, 1000) > kSmallObjectPercent);
  CHECK(location_phrase({0, 0, 5, 5}, 120, 180) == "top left");
  const std::string p = instantiate(TemplateId::Text2Bbox, {.ref = "ok"});
  CHECK(p.find("Please provide the bounding box coordinate of the region this sentence describes") !=
        std::string::npos);
}

TEST_CASE("scale round trip error is bounded by ceil(W/1000)") {
  for (int w : {90, 999, 1000, 1234, 3001}) {
    const int bound = (w + 999) / 1000;
    for (int x = 0; x <= w; x += std::max(1, w / 97)) {
      const BBox back = unscale_box(scale_box({x, x % 50, w, 50}, w, 50), w, 50);
      CHECK(std::abs(back.x_left - x) <= bound);
    }
  }
}

TEST_CASE("mark outline has the perimeter pixel count") {
  const GrayImage img(30, 30, 0);
  for (int w = 2; w <= 6; ++w) {
    for (int h = 2; h <= 5; ++h) {
      const GrayImage m = render_marks(img, {3, 4, 3 + w, 4 + h});
      int n = 0;
      for (auto v : m.pixels) n += v == kMarkIntensity;
      CHECK(n == 2 * (w + h) - 4);
    }
  }
}

TEST_CASE("local description of an icon names a sibling text") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Scene s = gen_screen(seed, GenConfig{});
    const auto flat = s.flatten();
    for (const auto& smp : build_synth_qa(s, QaKind::Mpe)) {
      if (smp.task != kTaskLocalDesc) continue;
      const int id = smp.meta["nodes"][0].get<int>();
      if (flat[id].node->kind != NodeKind::Icon) continue;
      const VHNode& parent = *flat[flat[id].parent].node;
      for (const auto& c : parent.children) {
        if (c.kind == NodeKind::Text) {
          ++checked;
          CHECK(smp.target.find(", next to ") != std::string::npos);
          break;
        }
      }
    }
  }
  CHECK(checked > 0);
}
