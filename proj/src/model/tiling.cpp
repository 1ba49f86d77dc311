// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/model/tiling.hpp"

#include <cmath>

#include "mpgui/errors.hpp"

namespace mpgui::model {

TileGrid choose_grid(int width, int height, int max_tiles) {
  if (width < 1 || height < 1) throw InputError("tile_image: empty image");
  if (max_tiles < 1) throw ConfigError("max_tiles must be positive");
  const double target = std::log(static_cast<double>(width) / height);
  TileGrid best;
  double best_err = std::abs(target);
  for (int gy = 1; gy <= max_tiles; ++gy) {
    for (int gx = 1; gx * gy <= max_tiles; ++gx) {
      const double err = std::abs(std::log(static_cast<double>(gx) / gy) - target);
      const bool tie = std::abs(err - best_err) <= 1e-12;
      const int tiles = gx * gy;
      if ((!tie && err < best_err) ||
          (tie && (tiles < best.count() || (tiles == best.count() && gx > best.cols)))) {
        best = {gx, gy};
        best_err = std::min(err, best_err);
      }
    }
  }
  return best;
}

GrayImage resize_nearest(const GrayImage& img, int width, int height) {
  if (img.empty()) throw InputError("resize: empty image");
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>((2LL * y + 1) * img.height / (2LL * height));
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>((2LL * x + 1) * img.width / (2LL * width));
      out.at(x, y) = img.at(sx, sy);
    }
  }
  return out;
}

TileSet tile_image(const GrayImage& raster, const ModelConfig& cfg) {
  if (raster.empty()) throw InputError("tile_image: empty image");
  TileSet set;
  set.grid = choose_grid(raster.width, raster.height, cfg.max_tiles);
  set.tile_side = cfg.tile_side;
  const int s = cfg.tile_side;
  const GrayImage resized = resize_nearest(raster, set.grid.cols * s, set.grid.rows * s);
  for (int gy = 0; gy < set.grid.rows; ++gy) {
    for (int gx = 0; gx < set.grid.cols; ++gx) {
      GrayImage tile(s, s);
      for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) tile.at(x, y) = resized.at(gx * s + x, gy * s + y);
      set.tiles.push_back(std::move(tile));
    }
  }
  return set;
}

}  // namespace mpgui::model
