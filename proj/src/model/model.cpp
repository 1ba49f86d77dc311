// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mpgui/errors.hpp"
#include "mpgui/rng.hpp"

namespace mpgui::model {

std::string lora_group(std::string_view base) { return std::string(base) + ".lora"; }

Perceiver parse_perceiver(std::string_view name) {
  if (name == "textual" || name == "T" || name == kTextual) return Perceiver::Textual;
  if (name == "graphical" || name == "G" || name == kGraphical) return Perceiver::Graphical;
  if (name == "spatial" || name == "S" || name == kSpatial) return Perceiver::Spatial;
  throw ContractError("unknown perceiver selector '" + std::string(name) + "'");
}

std::string_view perceiver_group(Perceiver p) {
  switch (p) {
    case Perceiver::Textual: return kTextual;
    case Perceiver::Graphical: return kGraphical;
    case Perceiver::Spatial: return kSpatial;
  }
  throw ContractError("unknown perceiver");
}

char perceiver_label(Perceiver p) {
  switch (p) {
    case Perceiver::Textual: return 'T';
    case Perceiver::Graphical: return 'G';
    case Perceiver::Spatial: return 'S';
  }
  throw ContractError("unknown perceiver");
}

namespace {

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, double inv_sqrt_d,
                 bool causal) {
  Tensor logits = scale(matmul(q, transpose(k)), inv_sqrt_d);
  return matmul(causal ? causal_softmax_rows(logits) : softmax_rows(logits), v);
}

Tensor normal_tensor(std::size_t rows, std::size_t cols, double stddev, std::uint64_t seed,
                     std::string_view stream) {
  auto rng = make_rng(seed, stream);
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = dist(rng);
  return Tensor::from(rows, cols, std::move(v), true);
}

}  // namespace

FusionOutput fusion_gate(const Tensor& aligned, const Tensor& question, const Tensor& modality,
                         const FusionGateParams& p) {
  if (question.rows() == 0) throw EmptyPromptError("fusion_gate: prompt has no tokens");
  const std::size_t d = aligned.cols();
  if (question.cols() != d || modality.cols() != d) {
    throw ShapeError("fusion_gate: width mismatch aligned " + aligned.shape_str() +
                     ", question " + question.shape_str() + ", modality " +
                     modality.shape_str());
  }
  if (modality.rows() != 3 * aligned.rows()) {
    throw ShapeError("fusion_gate: modality rows must be 3N, got " + modality.shape_str() +
                     " for N=" + std::to_string(aligned.rows()));
  }
  const double inv = 1.0 / std::sqrt(static_cast<double>(d));
  FusionOutput out;
  out.gating = attention(matmul(aligned, p.wq_g), matmul(question, p.wk_g),
                         matmul(question, p.wv_g), inv, false);
  out.fused = attention(matmul(out.gating, p.wq_t), matmul(modality, p.wk_t),
                        matmul(modality, p.wv_t), inv, false);
  return out;
}

Tensor assemble_sequence(const Tensor& aligned, const Tensor& fused, const Tensor& question,
                         const Tensor* answer) {
  if (answer != nullptr && answer->rows() > 0) {
    return concat_rows({aligned, fused, question, *answer});
  }
  return concat_rows({aligned, fused, question});
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

Model::Model(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t c = cfg_.feature_width;
  const std::size_t d = cfg_.model_width;
  const std::size_t h = cfg_.decoder_hidden;
  const std::size_t v = cfg_.vocab.size();

  auto init = [&](ParamGroup& g, std::string name, std::size_t rows, std::size_t cols,
                  double stddev, ParamKind kind = ParamKind::Weight) {
    const std::string stream = "init/" + g.name() + "/" + name;
    g.add(std::move(name), normal_tensor(rows, cols, stddev, seed, stream), kind);
  };
  auto bias = [&](ParamGroup& g, std::string name, std::size_t cols) {
    g.add(std::move(name), Tensor::zeros(1, cols, true), ParamKind::Bias);
  };
  auto fan_in = [](std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); };

  ParamGroup& backbone = params_.add_group(std::string(kBackbone));
  init(backbone, "patch_proj", cfg_.patch_pixels(), c, fan_in(cfg_.patch_pixels()));
  init(backbone, "pos", cfg_.max_image_tokens(), c, 0.5, ParamKind::Embedding);

  ParamGroup& align = params_.add_group(std::string(kAlign));
  init(align, "w1", c, d, fan_in(c));
  bias(align, "b1", d);
  init(align, "w2", d, d, fan_in(d));
  bias(align, "b2", d);

  for (auto name : {kTextual, kGraphical, kSpatial}) {
    ParamGroup& g = params_.add_group(std::string(name));
    init(g, "w1", c, d, fan_in(c));
    bias(g, "b1", d);
    init(g, "w2", d, d, fan_in(d));
    bias(g, "b2", d);
  }

  ParamGroup& fg = params_.add_group(std::string(kFusionGate));
  for (const char* name : {"wq_g", "wk_g", "wv_g", "wq_t", "wk_t", "wv_t"}) {
    init(fg, name, d, d, fan_in(d));
  }

  ParamGroup& dec = params_.add_group(std::string(kDecoder));
  init(dec, "embed", v, d, 1.0, ParamKind::Embedding);
  for (int l = 0; l < cfg_.decoder_layers; ++l) {
    const std::string p = "l" + std::to_string(l) + ".";
    init(dec, p + "wq", d, d, fan_in(d));
    init(dec, p + "wk", d, d, fan_in(d));
    init(dec, p + "wv", d, d, fan_in(d));
    init(dec, p + "wo", d, d, fan_in(d));
    init(dec, p + "w1", d, h, fan_in(d));
    bias(dec, p + "b1", h);
    init(dec, p + "w2", h, d, fan_in(h));
    bias(dec, p + "b2", d);
  }
  init(dec, "head", d, v, fan_in(d));
  bias(dec, "head_bias", v);

  const std::size_t max_len = cfg_.max_sequence();
  std::vector<double> pe(max_len * d);
  for (std::size_t pos = 0; pos < max_len; ++pos) {
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(d));
      pe[pos * d + 2 * i] = std::sin(static_cast<double>(pos) * freq);
      pe[pos * d + 2 * i + 1] = std::cos(static_cast<double>(pos) * freq);
    }
  }
  positions_ = Tensor::from(max_len, d, std::move(pe));
}

Model Model::clone() const {
  Model m;
  m.cfg_ = cfg_;
  m.positions_ = positions_;
  for (const ParamGroup& g : params_.groups()) {
    ParamGroup& dst = m.params_.add_group(g.name());
    for (const NamedTensor& nt : g.tensors()) {
      const auto v = nt.tensor.data();
      dst.add(nt.name,
              Tensor::from(nt.tensor.rows(), nt.tensor.cols(), {v.begin(), v.end()},
                           nt.tensor.requires_grad()),
              nt.kind);
    }
  }
  for (const auto& [key, ad] : adapters_) {
    const ParamGroup& ag = m.params_.group(lora_group(ad.group));
    LoraAdapter copy = ad;
    copy.a = ag.get(ad.target + ".A");
    copy.b = ag.get(ad.target + ".B");
    m.adapters_[key] = copy;
  }
  return m;
}

Tensor Model::weight(std::string_view group, std::string_view name) const {
  const Tensor& base = params_.group(group).get(name);
  auto it = adapters_.find(std::string(group) + "/" + std::string(name));
  if (it == adapters_.end()) return base;
  const LoraAdapter& ad = it->second;
  return add(base, scale(matmul(ad.b, ad.a), ad.scaling()));
}

Tensor Model::patch_matrix(const TileSet& tiles) const {
  const int side = cfg_.tile_side;
  const int ps = cfg_.patch_side;
  if (tiles.tile_side != side) throw ShapeError("patch_matrix: tiles cut at a different tile_side");
  if (static_cast<int>(tiles.tiles.size()) > cfg_.max_tiles) {
    throw ShapeError("patch_matrix: more tiles than max_tiles");
  }
  const int per_side = side / ps;
  const std::size_t n = tiles.tiles.size() * static_cast<std::size_t>(per_side * per_side);
  const std::size_t p = cfg_.patch_pixels();
  std::vector<double> out(n * p);
  std::size_t row = 0;
  for (const GrayImage& tile : tiles.tiles) {
    for (int py = 0; py < per_side; ++py) {
      for (int px = 0; px < per_side; ++px, ++row) {
        std::size_t k = 0;
        for (int y = 0; y < ps; ++y)
          for (int x = 0; x < ps; ++x, ++k)
            out[row * p + k] = tile.at(px * ps + x, py * ps + y) / 255.0;
      }
    }
  }
  return Tensor::from(n, p, std::move(out));
}

Tensor Model::encode_backbone(const TileSet& tiles) const {
  const Tensor patches = patch_matrix(tiles);
  const Tensor& pos = params_.group(kBackbone).get("pos");
  return add(matmul(patches, weight(kBackbone, "patch_proj")), slice_rows(pos, 0, patches.rows()));
}

Tensor Model::mlp(std::string_view group, const Tensor& x) const {
  const ParamGroup& g = params_.group(group);
  Tensor hidden = gelu(add_row(matmul(x, weight(group, "w1")), g.get("b1")));
  return add_row(matmul(hidden, weight(group, "w2")), g.get("b2"));
}

Tensor Model::align(const Tensor& features) const {
  if (features.cols() != static_cast<std::size_t>(cfg_.feature_width)) {
    throw ShapeError("align: expected width " + std::to_string(cfg_.feature_width) + ", got " +
                     features.shape_str());
  }
  return mlp(kAlign, features);
}

Tensor Model::perceive(const Tensor& features, Perceiver which) const {
  if (features.cols() != static_cast<std::size_t>(cfg_.feature_width)) {
    throw ShapeError("perceive: expected width " + std::to_string(cfg_.feature_width) +
                     ", got " + features.shape_str());
  }
  return mlp(perceiver_group(which), features);
}

FusionGateParams Model::fusion_params() const {
  return {weight(kFusionGate, "wq_g"), weight(kFusionGate, "wk_g"), weight(kFusionGate, "wv_g"),
          weight(kFusionGate, "wq_t"), weight(kFusionGate, "wk_t"), weight(kFusionGate, "wv_t")};
}

Tensor Model::embed(std::span<const int> tokens) const {
  return gather_rows(weight(kDecoder, "embed"), tokens);
}

Tensor Model::decoder_block(int layer, const Tensor& x) const {
  const std::string p = "l" + std::to_string(layer) + ".";
  const ParamGroup& dec = params_.group(kDecoder);
  const double inv = 1.0 / std::sqrt(static_cast<double>(cfg_.model_width));
  Tensor h = rms_norm_rows(x);
  Tensor attn = attention(matmul(h, weight(kDecoder, p + "wq")), matmul(h, weight(kDecoder, p + "wk")),
                          matmul(h, weight(kDecoder, p + "wv")), inv, true);
  Tensor x1 = add(x, matmul(attn, weight(kDecoder, p + "wo")));
  Tensor h2 = rms_norm_rows(x1);
  Tensor ff = gelu(add_row(matmul(h2, weight(kDecoder, p + "w1")), dec.get(p + "b1")));
  return add(x1, add_row(matmul(ff, weight(kDecoder, p + "w2")), dec.get(p + "b2")));
}

Tensor Model::decode(const Tensor& sequence) const {
  const std::size_t len = sequence.rows();
  if (len == 0) throw ContractError("decode: empty sequence");
  if (len > positions_.rows()) {
    throw LengthError("decode: sequence length " + std::to_string(len) + " exceeds maximum " +
                      std::to_string(positions_.rows()));
  }
  Tensor x = add(sequence, slice_rows(positions_, 0, len));
  for (int l = 0; l < cfg_.decoder_layers; ++l) x = decoder_block(l, x);
  return add_row(matmul(rms_norm_rows(x), weight(kDecoder, "head")),
                 params_.group(kDecoder).get("head_bias"));
}

Prefix Model::encode_prefix(const TileSet& tiles, std::span<const int> question) const {
  if (question.size() > static_cast<std::size_t>(cfg_.max_prompt_tokens)) {
    throw LengthError("prompt has " + std::to_string(question.size()) + " tokens, maximum is " +
                      std::to_string(cfg_.max_prompt_tokens));
  }
  Prefix p;
  p.features = encode_backbone(tiles);
  p.image_tokens = p.features.rows();
  p.aligned = align(p.features);
  p.textual = perceive(p.features, Perceiver::Textual);
  p.graphical = perceive(p.features, Perceiver::Graphical);
  p.spatial = perceive(p.features, Perceiver::Spatial);
  p.question = embed(question);
  p.gate = fusion_gate(p.aligned, p.question, concat_rows({p.textual, p.graphical, p.spatial}),
                       fusion_params());
  return p;
}

Tensor Model::logits(const Prefix& prefix, std::span<const int> answer) const {
  if (answer.empty()) {
    return decode(assemble_sequence(prefix.aligned, prefix.gate.fused, prefix.question));
  }
  const Tensor ans = embed(answer);
  return decode(assemble_sequence(prefix.aligned, prefix.gate.fused, prefix.question, &ans));
}

std::vector<int> Model::greedy_decode(const TileSet& tiles, std::span<const int> question,
                                      int max_tokens) const {
  NoGradGuard no_grad;
  const Prefix prefix = encode_prefix(tiles, question);
  const int room = static_cast<int>(positions_.rows() - prefix.length()) + 1;
  const int limit = std::min(max_tokens, room);
  std::vector<int> out;
  while (static_cast<int>(out.size()) < limit) {
    // Logits at the last position predict the next token; the final answer
    // token never needs to be fed back in.
    const Tensor lg = logits(prefix, out);
    const std::size_t last = lg.rows() - 1;
    auto row = lg.data().subspan(last * lg.cols(), lg.cols());
    const int next = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    out.push_back(next);
    if (next == vocab().eos()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// LoRA
// ---------------------------------------------------------------------------

std::vector<std::string> lora_wrap(Model& model, std::span<const std::string> groups,
                                   const LoraOptions& opts, std::uint64_t seed) {
  if (opts.rank < 1) throw ConfigError("LoRA rank must be >= 1");
  std::vector<std::string> wrapped;
  for (const std::string& gname : groups) {
    const ParamGroup& base = model.params().group(gname);
    const std::string agroup = lora_group(gname);
    if (model.params().has_group(agroup)) throw ConfigError("group " + gname + " already wrapped");

    // Validate every target before mutating anything.
    std::vector<std::pair<const NamedTensor*, int>> targets;
    for (const NamedTensor& nt : base.tensors()) {
      if (nt.kind == ParamKind::Bias) continue;
      if (nt.kind == ParamKind::Embedding && !opts.include_embeddings) continue;
      const int limit = static_cast<int>(std::min(nt.tensor.rows(), nt.tensor.cols()));
      int rank = opts.rank;
      if (rank > limit) {
        if (!opts.clamp_rank) {
          throw ConfigError("LoRA rank " + std::to_string(opts.rank) + " exceeds min dims of " +
                            gname + "/" + nt.name + " " + nt.tensor.shape_str());
        }
        rank = limit;
      }
      targets.emplace_back(&nt, rank);
    }

    ParamGroup& ag = model.params().add_group(agroup);
    for (auto [nt, rank] : targets) {
      const std::string key = gname + "/" + nt->name;
      const double alpha = opts.alpha * rank / opts.rank;
      Tensor a = normal_tensor(rank, nt->tensor.cols(),
                               1.0 / std::sqrt(static_cast<double>(nt->tensor.cols())), seed,
                               "lora/" + key);
      Tensor b = Tensor::zeros(nt->tensor.rows(), rank, true);
      ag.add(nt->name + ".A", a);
      ag.add(nt->name + ".B", b);
      model.adapters()[key] = LoraAdapter{gname, nt->name, a, b, rank, alpha};
      wrapped.push_back(key);
    }
  }
  return wrapped;
}

void lora_merge(Model& model) {
  std::vector<std::string> groups;
  for (auto& [key, ad] : model.adapters()) {
    Tensor& w = model.params().group(ad.group).get(ad.target);
    Tensor delta;
    {
      NoGradGuard no_grad;
      delta = scale(matmul(ad.b, ad.a), ad.scaling());
    }
    auto dst = w.mutable_data();
    auto src = delta.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (src[i] != 0.0) dst[i] += src[i];
    }
    if (std::find(groups.begin(), groups.end(), ad.group) == groups.end()) groups.push_back(ad.group);
  }
  model.adapters().clear();
  for (const auto& g : groups) model.params().remove_group(lora_group(g));
}

}  // namespace mpgui::model
