// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpgui/tensor/tensor.hpp"

namespace mpgui {

// LoRA targets weight matrices only, unless a caller opts in explicitly.
enum class ParamKind { Weight, Bias, Embedding };

struct NamedTensor {
  std::string name;
  Tensor tensor;
  ParamKind kind = ParamKind::Weight;
};

class ParamGroup {
 public:
  explicit ParamGroup(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  Tensor& add(std::string name, Tensor t, ParamKind kind = ParamKind::Weight);
  bool contains(std::string_view name) const;
  Tensor& get(std::string_view name);
  const Tensor& get(std::string_view name) const;
  const NamedTensor& entry(std::string_view name) const;

  std::vector<NamedTensor>& tensors() { return tensors_; }
  const std::vector<NamedTensor>& tensors() const { return tensors_; }
  std::size_t numel() const;

  void zero_grad();
  // FNV-1a over (name, shape, raw bytes) of every tensor in order.
  std::uint64_t content_hash() const;

 private:
  std::string name_;
  std::vector<NamedTensor> tensors_;
};

// Ordered set of groups making up one model. A tensor belongs to exactly one
// group; group names are unique.
class ParamStore {
 public:
  ParamGroup& add_group(std::string name);
  void remove_group(std::string_view name);
  bool has_group(std::string_view name) const;
  ParamGroup& group(std::string_view name);
  const ParamGroup& group(std::string_view name) const;
  std::vector<std::string> group_names() const;

  std::deque<ParamGroup>& groups() { return groups_; }
  const std::deque<ParamGroup>& groups() const { return groups_; }

  std::map<std::string, std::uint64_t> hashes() const;
  void zero_grad();
  std::size_t numel() const;

 private:
  std::deque<ParamGroup> groups_;  // references stay valid across add_group
};

std::string hash_hex(std::uint64_t h);

// ---------------------------------------------------------------------------
// Checkpoints: a version-tagged text file. Values are written as hex floats so
// the round trip is exact; entries are sorted by group then name.
//
//   mpgui-checkpoint v1
//   meta <key> <value...>
//   tensor <group>/<name> <rows> <cols>
//   <row-major values, one row per line>
// ---------------------------------------------------------------------------

struct Checkpoint {
  std::map<std::string, std::string> meta;
  // "group/name" -> tensor (no grad)
  std::map<std::string, Tensor> tensors;
};

inline constexpr const char* kCheckpointMagic = "mpgui-checkpoint v1";

void save_checkpoint(const std::filesystem::path& path, const ParamStore& store,
                     const std::map<std::string, std::string>& meta);
Checkpoint read_checkpoint(const std::filesystem::path& path);
// Copies values into an existing store; every tensor must be present with
// matching shape.
void load_into(const Checkpoint& ckpt, ParamStore& store);

// ---------------------------------------------------------------------------
// Central-difference gradient oracle. Perturbs each scalar of each tensor in
// the group in place, evaluates f at theta +- eps, and restores the value.
// ---------------------------------------------------------------------------

using ScalarFn = std::function<double()>;

std::vector<std::vector<double>> finite_diff_grad(const ScalarFn& f, ParamGroup& params,
                                                  double eps);
std::vector<double> finite_diff_grad(const ScalarFn& f, Tensor& param, double eps);

// max |a-b| / max(|a|, |b|, floor) over paired entries.
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor = 1e-8);

}  // namespace mpgui
