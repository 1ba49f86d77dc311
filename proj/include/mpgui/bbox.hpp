// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace mpgui {

// Axis-aligned [x_left, y_top, x_right, y_bottom]. Used both in pixel units
// and in the [0,1000] scaled frame that prompts and targets use.
struct BBox {
  int x_left = 0;
  int y_top = 0;
  int x_right = 0;
  int y_bottom = 0;

  int width() const { return x_right - x_left; }
  int height() const { return y_bottom - y_top; }
  long long area() const {
    return valid() ? static_cast<long long>(width()) * height() : 0;
  }
  bool valid() const { return x_left < x_right && y_top < y_bottom; }
  bool contains(const BBox& o) const {
    return x_left <= o.x_left && y_top <= o.y_top && o.x_right <= x_right &&
           o.y_bottom <= y_bottom;
  }

  auto operator<=>(const BBox&) const = default;
};

// "[l,t,r,b]" with no spaces.
std::string format_box(const BBox& b);
// First "[a,b,c,d]" group in the text (spaces allowed around numbers).
std::optional<BBox> parse_box(std::string_view text);

}  // namespace mpgui
