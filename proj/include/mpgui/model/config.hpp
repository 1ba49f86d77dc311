// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include <json.hpp>

#include "mpgui/model/vocab.hpp"

namespace mpgui::model {

// Toy-scale dimensions of the model.
//   N = tiles * (tile_side / patch_side)^2 image tokens per screen
//   C = backbone feature width, D = model width
struct ModelConfig {
  int tile_side = 28;
  int max_tiles = 6;
  int patch_side = 7;
  int feature_width = 32;   // C
  int model_width = 32;     // D
  int max_prompt_tokens = 48;  // M_max
  int max_answer_tokens = 256;
  int decoder_layers = 2;
  int decoder_hidden = 64;
  Vocab vocab = Vocab::standard();

  int patches_per_tile() const {
    const int s = tile_side / patch_side;
    return s * s;
  }
  int patch_pixels() const { return patch_side * patch_side; }
  int max_image_tokens() const { return max_tiles * patches_per_tile(); }
  int max_sequence() const {
    return 2 * max_image_tokens() + max_prompt_tokens + max_answer_tokens;
  }

  // Throws ConfigError on broken invariants.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& cfg);
// Missing keys keep their defaults.
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace mpgui::model
