// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mpgui/tensor/tensor.hpp"
#include "mpgui/training/stage.hpp"

namespace mpgui::training {

// Decoupled weight decay Adam. Moments live alongside each tracked tensor and
// are never shared between optimizer instances.
class AdamW {
 public:
  struct Slot {
    Tensor param;
    bool decay = true;
    std::vector<double> m;
    std::vector<double> v;
  };

  AdamW(AdamConfig cfg, double weight_decay) : cfg_(cfg), weight_decay_(weight_decay) {}

  void track(Tensor param, bool decay);
  std::size_t size() const { return slots_.size(); }
  std::size_t steps_taken() const { return t_; }

  void zero_grad();
  // theta -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
  void step(double lr);

 private:
  AdamConfig cfg_;
  double weight_decay_;
  std::vector<Slot> slots_;
  std::size_t t_ = 0;
};

// Mean cross-entropy over rows whose mask is set. Throws ContractError when
// the mask selects nothing.
Tensor masked_loss(const Tensor& logits, std::span<const int> targets,
                   std::span<const bool> mask);

}  // namespace mpgui::training
