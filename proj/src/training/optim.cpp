// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/training/optim.hpp"

#include <cmath>

#include "mpgui/errors.hpp"

namespace mpgui::training {

void AdamW::track(Tensor param, bool decay) {
  const std::size_t n = param.size();
  slots_.push_back({std::move(param), decay, std::vector<double>(n, 0.0),
                    std::vector<double>(n, 0.0)});
}

void AdamW::zero_grad() {
  for (auto& s : slots_) s.param.zero_grad();
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (auto& s : slots_) {
    if (!s.param.has_grad()) continue;
    auto w = s.param.mutable_data();
    auto g = s.param.grad();
    const double wd = s.decay ? weight_decay_ : 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!std::isfinite(g[i])) throw NumericError("AdamW: non-finite gradient");
      s.m[i] = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * g[i];
      s.v[i] = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mh = s.m[i] / bc1;
      const double vh = s.v[i] / bc2;
      // Skipping the write at lr == 0 keeps the bytes identical.
      const double delta = lr * (mh / (std::sqrt(vh) + cfg_.eps) + wd * w[i]);
      if (delta != 0.0) w[i] -= delta;
    }
  }
}

Tensor masked_loss(const Tensor& logits, std::span<const int> targets,
                   std::span<const bool> mask) {
  if (targets.size() != mask.size()) {
    throw ShapeError("masked_loss: " + std::to_string(targets.size()) + " targets but " +
                     std::to_string(mask.size()) + " mask entries");
  }
  std::vector<int> t(targets.size());
  bool any = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = mask[i] ? targets[i] : -1;
    any = any || mask[i];
  }
  if (!any) throw ContractError("masked_loss: empty mask");
  return cross_entropy_rows(logits, t);
}

}  // namespace mpgui::training
