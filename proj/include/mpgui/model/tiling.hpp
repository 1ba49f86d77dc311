// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include "mpgui/image.hpp"
#include "mpgui/model/config.hpp"

namespace mpgui::model {

struct TileGrid {
  int cols = 1;  // gx
  int rows = 1;  // gy
  int count() const { return cols * rows; }
  bool operator==(const TileGrid&) const = default;
};

struct TileSet {
  TileGrid grid;
  int tile_side = 0;
  std::vector<GrayImage> tiles;  // row-major over the grid
};

// Grid (gx, gy) with gx*gy <= max_tiles whose aspect ratio is closest to the
// image's in log space; ties go to fewer tiles, then to the wider grid.
TileGrid choose_grid(int width, int height, int max_tiles);

// Nearest-neighbour resize.
GrayImage resize_nearest(const GrayImage& img, int width, int height);

TileSet tile_image(const GrayImage& raster, const ModelConfig& cfg);

}  // namespace mpgui::model
