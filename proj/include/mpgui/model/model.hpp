// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpgui/model/config.hpp"
#include "mpgui/model/tiling.hpp"
#include "mpgui/tensor/params.hpp"
#include "mpgui/tensor/tensor.hpp"

namespace mpgui::model {

// Parameter group names. Adapter groups are "<base>.lora".
inline constexpr std::string_view kBackbone = "backbone";
inline constexpr std::string_view kAlign = "align";
inline constexpr std::string_view kTextual = "TxP";
inline constexpr std::string_view kGraphical = "GaP";
inline constexpr std::string_view kSpatial = "SaP";
inline constexpr std::string_view kFusionGate = "FG";
inline constexpr std::string_view kDecoder = "decoder";

std::string lora_group(std::string_view base);

enum class Perceiver { Textual, Graphical, Spatial };

// Accepts "textual"/"graphical"/"spatial", "T"/"G"/"S", or the group names.
Perceiver parse_perceiver(std::string_view name);
std::string_view perceiver_group(Perceiver p);
char perceiver_label(Perceiver p);

struct FusionGateParams {
  Tensor wq_g, wk_g, wv_g;  // question gating (first attention)
  Tensor wq_t, wk_t, wv_t;  // modality fusion (second attention)
};

struct FusionOutput {
  Tensor gating;  // N x D
  Tensor fused;   // N x D
};

// gating = softmax((aligned Wq_g)(question Wk_g)^T / sqrt(D)) (question Wv_g)
// fused  = softmax((gating Wq_t)(modality Wk_t)^T / sqrt(D)) (modality Wv_t)
// Both softmaxes run over the key axis. modality is [X_t; X_g; X_s].
FusionOutput fusion_gate(const Tensor& aligned, const Tensor& question, const Tensor& modality,
                         const FusionGateParams& p);

// [aligned; fused; question] plus, when given, answer embeddings.
Tensor assemble_sequence(const Tensor& aligned, const Tensor& fused, const Tensor& question,
                         const Tensor* answer = nullptr);

struct LoraAdapter {
  std::string group;
  std::string target;
  Tensor a;  // rank x cols
  Tensor b;  // rows x rank, zero at creation
  int rank = 0;
  double alpha = 0.0;
  double scaling() const { return alpha / rank; }
};

// Everything computed before the answer tokens.
struct Prefix {
  Tensor features;  // N x C
  Tensor aligned;   // N x D
  Tensor textual, graphical, spatial;
  FusionOutput gate;
  Tensor question;  // M x D
  std::size_t image_tokens = 0;
  std::size_t length() const { return 2 * image_tokens + question.rows(); }
};

class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t seed);
  // Parameters are shared handles, so copies would alias; use clone().
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  // Deep copy of parameters and adapters.
  Model clone() const;

  const ModelConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return cfg_.vocab; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Base weight, plus the scaled adapter product when one is attached.
  Tensor weight(std::string_view group, std::string_view name) const;

  // Constant N x patch_pixels matrix of normalized pixels, tile-major then
  // patch-major.
  Tensor patch_matrix(const TileSet& tiles) const;
  Tensor encode_backbone(const TileSet& tiles) const;
  Tensor align(const Tensor& features) const;
  Tensor perceive(const Tensor& features, Perceiver which) const;
  FusionGateParams fusion_params() const;
  Tensor embed(std::span<const int> tokens) const;
  // Causal transformer over a sequence of D-wide embeddings.
  Tensor decode(const Tensor& sequence) const;

  Prefix encode_prefix(const TileSet& tiles, std::span<const int> question) const;
  Tensor logits(const Prefix& prefix, std::span<const int> answer) const;
  std::vector<int> greedy_decode(const TileSet& tiles, std::span<const int> question,
                                 int max_tokens) const;

  const std::map<std::string, LoraAdapter>& adapters() const { return adapters_; }
  std::map<std::string, LoraAdapter>& adapters() { return adapters_; }

 private:
  Model() = default;
  Tensor mlp(std::string_view group, const Tensor& x) const;
  Tensor decoder_block(int layer, const Tensor& x) const;

  ModelConfig cfg_;
  ParamStore params_;
  Tensor positions_;  // max_sequence x D sinusoidal table
  std::map<std::string, LoraAdapter> adapters_;  // keyed "group/name"
};

struct LoraOptions {
  int rank = 8;
  double alpha = 16.0;
  // Lower the rank per target to min(rows, cols) instead of failing, keeping
  // alpha / rank fixed.
  bool clamp_rank = false;
  bool include_embeddings = false;
};

// Attaches adapters to every weight matrix of the named groups. A is drawn
// from the seed, B starts at zero. Returns the wrapped "group/name" keys.
std::vector<std::string> lora_wrap(Model& model, std::span<const std::string> groups,
                                   const LoraOptions& opts, std::uint64_t seed);
// Folds every adapter into its base weight and drops the adapter groups.
void lora_merge(Model& model);

}  // namespace mpgui::model
