// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/tensor/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "mpgui/errors.hpp"

namespace mpgui {

namespace {

thread_local bool g_grad_mode = true;

std::string shape_of(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

const Node& need(const Tensor& t, const char* op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
  return *t.node();
}

}  // namespace

// Internal constructor access for op implementations.
struct Graph {
  static std::shared_ptr<Node> leaf(std::size_t r, std::size_t c, std::vector<double> v,
                                    bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->rows = r;
    n->cols = c;
    n->data = std::move(v);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return n;
  }

  // Result node of an op. Records parents and the backward closure only when
  // grad mode is on and at least one input requires grad.
  static Tensor result(std::size_t r, std::size_t c, std::vector<double> v,
                       std::initializer_list<const Tensor*> inputs,
                       std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->rows = r;
    n->cols = c;
    n->data = std::move(v);
    n->is_leaf = false;
    if (g_grad_mode) {
      for (const Tensor* in : inputs) {
        if (in->node_->requires_grad) n->requires_grad = true;
      }
      if (n->requires_grad) {
        for (const Tensor* in : inputs) n->parents.push_back(in->node_);
        n->backward_fn = std::move(backward_fn);
      }
    }
    return Tensor(std::move(n));
  }

  static Tensor result_many(std::size_t r, std::size_t c, std::vector<double> v,
                            std::span<const Tensor> inputs,
                            std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->rows = r;
    n->cols = c;
    n->data = std::move(v);
    n->is_leaf = false;
    if (g_grad_mode) {
      for (const Tensor& in : inputs) {
        if (in.node_->requires_grad) n->requires_grad = true;
      }
      if (n->requires_grad) {
        for (const Tensor& in : inputs) n->parents.push_back(in.node_);
        n->backward_fn = std::move(backward_fn);
      }
    }
    return Tensor(std::move(n));
  }

  static const std::shared_ptr<Node>& ptr(const Tensor& t) { return t.node_; }
};

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return Tensor(Graph::leaf(rows, cols, std::vector<double>(rows * cols, 0.0), requires_grad));
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value, bool requires_grad) {
  return Tensor(Graph::leaf(rows, cols, std::vector<double>(rows * cols, value), requires_grad));
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values,
                    bool requires_grad) {
  if (values.size() != rows * cols) {
    throw ShapeError("Tensor::from: " + std::to_string(values.size()) +
                     " values for shape " + shape_of(rows, cols));
  }
  return Tensor(Graph::leaf(rows, cols, std::move(values), requires_grad));
}

Tensor Tensor::identity(std::size_t n, bool requires_grad) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return Tensor(Graph::leaf(n, n, std::move(v), requires_grad));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return Tensor(Graph::leaf(1, 1, {v}, requires_grad));
}

std::size_t Tensor::rows() const { return need(*this, "rows").rows; }
std::size_t Tensor::cols() const { return need(*this, "cols").cols; }

std::string Tensor::shape_str() const {
  return defined() ? shape_of(node_->rows, node_->cols) : "(undefined)";
}

std::span<const double> Tensor::data() const { return need(*this, "data").data; }
std::span<double> Tensor::mutable_data() {
  need(*this, "mutable_data");
  return node_->data;
}

double Tensor::at(std::size_t r, std::size_t c) const {
  const Node& n = need(*this, "at");
  if (r >= n.rows || c >= n.cols) {
    throw ShapeError("at(" + std::to_string(r) + "," + std::to_string(c) + ") outside " +
                     shape_of(n.rows, n.cols));
  }
  return n.data[r * n.cols + c];
}

double Tensor::item() const {
  const Node& n = need(*this, "item");
  if (n.rows != 1 || n.cols != 1) throw ShapeError("item() on " + shape_str());
  return n.data[0];
}

bool Tensor::requires_grad() const { return need(*this, "requires_grad").requires_grad; }
void Tensor::set_requires_grad(bool on) {
  Node& n = const_cast<Node&>(need(*this, "set_requires_grad"));
  if (!n.is_leaf) throw ContractError("set_requires_grad on a non-leaf tensor");
  n.requires_grad = on;
}
bool Tensor::has_grad() const { return defined() && node_->grad.size() == node_->data.size(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw ContractError("grad() on tensor without grad " + shape_str());
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!has_grad()) throw ContractError("mutable_grad() on tensor without grad " + shape_str());
  return node_->grad;
}

void Tensor::zero_grad() {
  if (has_grad()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  const Node& n = need(*this, "detach");
  return Tensor(Graph::leaf(n.rows, n.cols, n.data, false));
}

void Tensor::backward() const {
  const Node& root = need(*this, "backward");
  if (root.rows != 1 || root.cols != 1) {
    throw ContractError("backward: loss must be scalar, got " + shape_str());
  }
  if (!root.requires_grad) {
    throw ContractError("backward: loss does not depend on any parameter");
  }

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<const Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->is_leaf) {
      n->grad.assign(n->data.size(), 0.0);
    } else {
      n->ensure_grad();
    }
  }
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = previous_; }
bool grad_mode_enabled() { return g_grad_mode; }

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

namespace {

// c[m x n] += a[m x k] * b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m x n] += a[m x k] * b^T where b is [n x k]
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      c[i * n + j] += s;
    }
  }
}

// c[m x n] += a^T * b where a is [k x m], b is [k x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

void require_finite(const Tensor& x, const char* op) {
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite input");
  }
}

void accumulate(Node& dst, std::span<const double> g, double s = 1.0) {
  if (!dst.requires_grad) return;
  dst.ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) dst.grad[i] += s * g[i];
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  need(a, "matmul");
  need(b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree " + a.shape_str() + " x " +
                     b.shape_str());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  return Graph::result(m, n, std::move(out), {&a, &b}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      gemm_nt(self.grad.data(), pb.data.data(), pa.grad.data(), m, n, k);
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      gemm_tn(pa.data.data(), self.grad.data(), pb.grad.data(), k, m, n);
    }
  });
}

Tensor transpose(const Tensor& a) {
  need(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  auto src = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = src[i * n + j];
  return Graph::result(n, m, std::move(out), {&a}, [m, n](Node& self) {
    Node& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) p.grad[i * n + j] += self.grad[j * m + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return Graph::result(a.rows(), a.cols(), std::move(out), {&a, &b}, [](Node& self) {
    accumulate(*self.parents[0], self.grad);
    accumulate(*self.parents[1], self.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return Graph::result(a.rows(), a.cols(), std::move(out), {&a, &b}, [](Node& self) {
    accumulate(*self.parents[0], self.grad);
    accumulate(*self.parents[1], self.grad, -1.0);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return Graph::result(a.rows(), a.cols(), std::move(out), {&a, &b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    // Read both data buffers before writing: pa and pb may alias (square).
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * pb.data[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i] * pa.data[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  need(a, "scale");
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= s;
  return Graph::result(a.rows(), a.cols(), std::move(out), {&a},
                       [s](Node& self) { accumulate(*self.parents[0], self.grad, s); });
}

Tensor repeat_rows(const Tensor& row, std::size_t m) {
  need(row, "repeat_rows");
  if (row.rows() != 1) throw ShapeError("repeat_rows: expected 1xn, got " + row.shape_str());
  const std::size_t n = row.cols();
  std::vector<double> out(m * n);
  auto src = row.data();
  for (std::size_t i = 0; i < m; ++i) std::copy(src.begin(), src.end(), out.begin() + i * n);
  return Graph::result(m, n, std::move(out), {&row}, [m, n](Node& self) {
    Node& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) p.grad[j] += self.grad[i * n + j];
  });
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  return add(a, repeat_rows(bias, a.rows()));
}

Tensor gelu(const Tensor& x) {
  need(x, "gelu");
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double c = 0.044715;
  std::vector<double> out(x.size());
  auto src = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = src[i];
    out[i] = 0.5 * v * (1.0 + std::tanh(k * (v + c * v * v * v)));
  }
  return Graph::result(x.rows(), x.cols(), std::move(out), {&x}, [](Node& self) {
    Node& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double v = p.data[i];
      const double t = std::tanh(k * (v + c * v * v * v));
      const double d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * k * (1.0 + 3.0 * c * v * v);
      p.grad[i] += self.grad[i] * d;
    }
  });
}

Tensor rms_norm_rows(const Tensor& x, double eps) {
  need(x, "rms_norm_rows");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m * n);
  std::vector<double> inv(m);
  auto src = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    double ms = 0.0;
    for (std::size_t j = 0; j < n; ++j) ms += src[i * n + j] * src[i * n + j];
    inv[i] = 1.0 / std::sqrt(ms / static_cast<double>(n) + eps);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = src[i * n + j] * inv[i];
  }
  return Graph::result(m, n, std::move(out), {&x}, [m, n, inv = std::move(inv)](Node& self) {
    Node& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += self.grad[i * n + j] * self.data[i * n + j];
      dot /= static_cast<double>(n);
      for (std::size_t j = 0; j < n; ++j) {
        p.grad[i * n + j] += (self.grad[i * n + j] - self.data[i * n + j] * dot) * inv[i];
      }
    }
  });
}

namespace {

Tensor softmax_impl(const Tensor& x, bool causal, const char* name) {
  need(x, name);
  require_finite(x, name);
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<double> out(m * n, 0.0);
  auto src = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t width = causal ? std::min(n, i + 1) : n;
    if (width == 0) continue;
    const double* row = src.data() + i * n;
    double mx = row[0];
    for (std::size_t j = 1; j < width; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      out[i * n + j] = std::exp(row[j] - mx);
      z += out[i * n + j];
    }
    for (std::size_t j = 0; j < width; ++j) out[i * n + j] /= z;
  }
  return Graph::result(m, n, std::move(out), {&x}, [m, n](Node& self) {
    Node& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += self.grad[i * n + j] * self.data[i * n + j];
      for (std::size_t j = 0; j < n; ++j) {
        p.grad[i * n + j] += self.data[i * n + j] * (self.grad[i * n + j] - dot);
      }
    }
  });
}

}  // namespace

Tensor softmax_rows(const Tensor& x) { return softmax_impl(x, false, "softmax_rows"); }
Tensor causal_softmax_rows(const Tensor& x) {
  return softmax_impl(x, true, "causal_softmax_rows");
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no parts");
  const std::size_t n = need(parts[0], "concat_rows").cols;
  std::size_t m = 0;
  std::vector<std::size_t> offsets;
  for (const Tensor& p : parts) {
    need(p, "concat_rows");
    if (p.cols() != n) {
      throw ShapeError("concat_rows: column mismatch " + parts[0].shape_str() + " vs " +
                       p.shape_str());
    }
    offsets.push_back(m);
    m += p.rows();
  }
  std::vector<double> out(m * n);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto src = parts[k].data();
    std::copy(src.begin(), src.end(), out.begin() + offsets[k] * n);
  }
  return Graph::result_many(m, n, std::move(out), parts,
                            [n, offsets = std::move(offsets)](Node& self) {
                              for (std::size_t k = 0; k < self.parents.size(); ++k) {
                                Node& p = *self.parents[k];
                                if (!p.requires_grad) continue;
                                p.ensure_grad();
                                const double* g = self.grad.data() + offsets[k] * n;
                                for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g[i];
                              }
                            });
}

Tensor concat_rows(std::initializer_list<Tensor> parts) {
  return concat_rows(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count) {
  need(x, "slice_rows");
  if (start + count > x.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") outside " + x.shape_str());
  }
  const std::size_t n = x.cols();
  auto src = x.data();
  std::vector<double> out(src.begin() + start * n, src.begin() + (start + count) * n);
  return Graph::result(count, n, std::move(out), {&x}, [start, n](Node& self) {
    Node& p = *self.parents[0];
    p.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[start * n + i] += self.grad[i];
  });
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  need(table, "gather_rows");
  const std::size_t n = table.cols();
  std::vector<double> out(ids.size() * n);
  auto src = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= table.rows()) {
      throw ShapeError("gather_rows: id " + std::to_string(ids[i]) + " outside table " +
                       table.shape_str());
    }
    std::copy_n(src.begin() + ids[i] * n, n, out.begin() + i * n);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return Graph::result(ids.size(), n, std::move(out), {&table},
                       [n, idx = std::move(idx)](Node& self) {
                         Node& p = *self.parents[0];
                         p.ensure_grad();
                         for (std::size_t i = 0; i < idx.size(); ++i)
                           for (std::size_t j = 0; j < n; ++j)
                             p.grad[idx[i] * n + j] += self.grad[i * n + j];
                       });
}

Tensor sum(const Tensor& x) {
  need(x, "sum");
  double s = 0.0;
  for (double v : x.data()) s += v;
  return Graph::result(1, 1, {s}, {&x}, [](Node& self) {
    Node& p = *self.parents[0];
    p.ensure_grad();
    for (double& g : p.grad) g += self.grad[0];
  });
}

Tensor square(const Tensor& x) { return mul(x, x); }

Tensor cross_entropy_rows(const Tensor& logits, std::span<const int> targets) {
  need(logits, "cross_entropy_rows");
  const std::size_t m = logits.rows(), n = logits.cols();
  if (targets.size() != m) {
    throw ShapeError("cross_entropy_rows: " + std::to_string(targets.size()) +
                     " targets for logits " + logits.shape_str());
  }
  require_finite(logits, "cross_entropy_rows");
  std::size_t count = 0;
  for (int t : targets) {
    if (t >= 0) {
      if (static_cast<std::size_t>(t) >= n) {
        throw ShapeError("cross_entropy_rows: target " + std::to_string(t) + " outside " +
                         std::to_string(n) + " classes");
      }
      ++count;
    }
  }
  if (count == 0) throw ContractError("cross_entropy_rows: empty mask");

  auto src = logits.data();
  std::vector<double> probs(m * n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (targets[i] < 0) continue;
    const double* row = src.data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      probs[i * n + j] = std::exp(row[j] - mx);
      z += probs[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) probs[i * n + j] /= z;
    total += -(row[targets[i]] - mx - std::log(z));
  }
  const double inv_count = 1.0 / static_cast<double>(count);
  std::vector<int> tgt(targets.begin(), targets.end());
  return Graph::result(
      1, 1, {total * inv_count}, {&logits},
      [m, n, inv_count, probs = std::move(probs), tgt = std::move(tgt)](Node& self) {
        Node& p = *self.parents[0];
        p.ensure_grad();
        const double g = self.grad[0] * inv_count;
        for (std::size_t i = 0; i < m; ++i) {
          if (tgt[i] < 0) continue;
          for (std::size_t j = 0; j < n; ++j) p.grad[i * n + j] += g * probs[i * n + j];
          p.grad[i * n + tgt[i]] -= g;
        }
      });
}

}  // namespace mpgui
