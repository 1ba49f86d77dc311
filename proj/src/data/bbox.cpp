// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/bbox.hpp"

#include <regex>

namespace mpgui {

std::string format_box(const BBox& b) {
  return "[" + std::to_string(b.x_left) + "," + std::to_string(b.y_top) + "," +
         std::to_string(b.x_right) + "," + std::to_string(b.y_bottom) + "]";
}

std::optional<BBox> parse_box(std::string_view text) {
  static const std::regex re(
      R"(\[\s*(-?\d{1,6})\s*,\s*(-?\d{1,6})\s*,\s*(-?\d{1,6})\s*,\s*(-?\d{1,6})\s*\])");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(text.begin(), text.end(), m, re)) return std::nullopt;
  return BBox{std::stoi(m[1].str()), std::stoi(m[2].str()), std::stoi(m[3].str()),
              std::stoi(m[4].str())};
}

}  // namespace mpgui
