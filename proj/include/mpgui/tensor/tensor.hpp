// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mpgui {

struct Node;

// Dense row-major matrix of doubles that participates in a reverse-mode
// differentiation graph.
//
// A Tensor is a shared handle: copying it aliases the same storage, which is
// how parameters are threaded through many forward graphs. Ops never mutate
// their inputs; only grad buffers (and parameter data, between optimizer
// steps) change after construction.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor full(std::size_t rows, std::size_t cols, double value,
                     bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor identity(std::size_t n, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t size() const { return rows() * cols(); }
  std::string shape_str() const;

  std::span<const double> data() const;
  // Parameter storage is mutated in place by optimizers and by
  // finite-difference probes. Never call this on a graph intermediate.
  std::span<double> mutable_data();
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  bool requires_grad() const;
  // Leaf tensors only. Used to freeze parameters for the duration of a stage.
  void set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Copy of the values with no graph history.
  Tensor detach() const;

  // Reverse sweep from a 1x1 tensor. Leaf grads accumulate (+=) across calls;
  // intermediate grads are reset at the start of every sweep.
  void backward() const;

  const Node* node() const noexcept { return node_.get(); }

 private:
  friend struct Graph;
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  std::shared_ptr<Node> node_;
};

struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

// Disables graph recording for the lifetime of the guard (thread-local).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

// ---------------------------------------------------------------------------
// Differentiable operations. No broadcasting anywhere: shapes must agree
// exactly, and row replication is explicit via repeat_rows.
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

// 1xn -> mxn.
Tensor repeat_rows(const Tensor& row, std::size_t m);
// a + repeat_rows(bias, a.rows()).
Tensor add_row(const Tensor& a, const Tensor& bias);

Tensor gelu(const Tensor& x);
Tensor rms_norm_rows(const Tensor& x, double eps = 1e-6);

Tensor softmax_rows(const Tensor& x);
// Row i is normalized over columns [0, i]; later columns are exactly zero.
Tensor causal_softmax_rows(const Tensor& x);

Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_rows(std::initializer_list<Tensor> parts);
Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count);
// Embedding lookup: out row i = table row ids[i].
Tensor gather_rows(const Tensor& table, std::span<const int> ids);

Tensor sum(const Tensor& x);
Tensor square(const Tensor& x);

// Mean cross-entropy of softmax(logits) against targets over rows whose
// target is >= 0. Rows with a negative target contribute nothing.
Tensor cross_entropy_rows(const Tensor& logits, std::span<const int> targets);

}  // namespace mpgui
