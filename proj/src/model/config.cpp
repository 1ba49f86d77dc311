// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/model/config.hpp"

#include "mpgui/data/templates.hpp"
#include "mpgui/errors.hpp"

namespace mpgui::model {

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(tile_side, "tile_side");
  positive(max_tiles, "max_tiles");
  positive(patch_side, "patch_side");
  positive(feature_width, "feature_width");
  positive(model_width, "model_width");
  positive(max_prompt_tokens, "max_prompt_tokens");
  positive(max_answer_tokens, "max_answer_tokens");
  positive(decoder_layers, "decoder_layers");
  positive(decoder_hidden, "decoder_hidden");
  if (tile_side % patch_side != 0) {
    throw ConfigError("tile_side " + std::to_string(tile_side) + " not divisible by patch_side " +
                      std::to_string(patch_side));
  }
  if (model_width % 2 != 0) throw ConfigError("model_width must be even");
  for (const auto& t : data::all_templates()) {
    try {
      const std::string filled =
          data::instantiate(t.id, {.ref = "a", .bbox = "[0,0,1,1]", .bbox2 = "[0,0,1,1]"});
      (void)vocab.encode_prompt(data::question_text(filled));
    } catch (const InputError& e) {
      throw ConfigError("vocabulary cannot express template " + std::string(t.key) + ": " +
                        e.what());
    }
  }
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return {
      {"tile_side", cfg.tile_side},
      {"max_tiles", cfg.max_tiles},
      {"patch_side", cfg.patch_side},
      {"feature_width", cfg.feature_width},
      {"model_width", cfg.model_width},
      {"max_prompt_tokens", cfg.max_prompt_tokens},
      {"max_answer_tokens", cfg.max_answer_tokens},
      {"decoder_layers", cfg.decoder_layers},
      {"decoder_hidden", cfg.decoder_hidden},
      {"vocab", cfg.vocab.symbols()},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  auto read = [&](const char* key, int& field) {
    if (j.contains(key)) field = j.at(key).get<int>();
  };
  read("tile_side", cfg.tile_side);
  read("max_tiles", cfg.max_tiles);
  read("patch_side", cfg.patch_side);
  read("feature_width", cfg.feature_width);
  read("model_width", cfg.model_width);
  read("max_prompt_tokens", cfg.max_prompt_tokens);
  read("max_answer_tokens", cfg.max_answer_tokens);
  read("decoder_layers", cfg.decoder_layers);
  read("decoder_hidden", cfg.decoder_hidden);
  if (j.contains("vocab")) cfg.vocab = Vocab(j.at("vocab").get<std::vector<std::string>>());
  cfg.validate();
  return cfg;
}

}  // namespace mpgui::model
