// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/tensor/params.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mpgui/errors.hpp"
#include "mpgui/rng.hpp"

namespace mpgui {

Tensor& ParamGroup::add(std::string name, Tensor t, ParamKind kind) {
  if (contains(name)) throw ContractError("duplicate tensor '" + name + "' in group " + name_);
  tensors_.push_back({std::move(name), std::move(t), kind});
  return tensors_.back().tensor;
}

bool ParamGroup::contains(std::string_view name) const {
  return std::any_of(tensors_.begin(), tensors_.end(),
                     [&](const NamedTensor& nt) { return nt.name == name; });
}

const NamedTensor& ParamGroup::entry(std::string_view name) const {
  for (const auto& nt : tensors_) {
    if (nt.name == name) return nt;
  }
  throw ContractError("no tensor '" + std::string(name) + "' in group " + name_);
}

Tensor& ParamGroup::get(std::string_view name) {
  return const_cast<NamedTensor&>(entry(name)).tensor;
}

const Tensor& ParamGroup::get(std::string_view name) const { return entry(name).tensor; }

std::size_t ParamGroup::numel() const {
  std::size_t n = 0;
  for (const auto& nt : tensors_) n += nt.tensor.size();
  return n;
}

void ParamGroup::zero_grad() {
  for (auto& nt : tensors_) nt.tensor.zero_grad();
}

std::uint64_t ParamGroup::content_hash() const {
  std::uint64_t h = fnv1a(name_);
  for (const auto& nt : tensors_) {
    h = fnv1a(nt.name, h);
    const std::uint64_t dims[2] = {nt.tensor.rows(), nt.tensor.cols()};
    h = fnv1a(dims, sizeof(dims), h);
    auto d = nt.tensor.data();
    h = fnv1a(d.data(), d.size() * sizeof(double), h);
  }
  return h;
}

ParamGroup& ParamStore::add_group(std::string name) {
  if (has_group(name)) throw ContractError("duplicate parameter group " + name);
  groups_.emplace_back(std::move(name));
  return groups_.back();
}

void ParamStore::remove_group(std::string_view name) {
  std::erase_if(groups_, [&](const ParamGroup& g) { return g.name() == name; });
}

bool ParamStore::has_group(std::string_view name) const {
  return std::any_of(groups_.begin(), groups_.end(),
                     [&](const ParamGroup& g) { return g.name() == name; });
}

const ParamGroup& ParamStore::group(std::string_view name) const {
  for (const auto& g : groups_) {
    if (g.name() == name) return g;
  }
  throw ContractError("no parameter group " + std::string(name));
}

ParamGroup& ParamStore::group(std::string_view name) {
  return const_cast<ParamGroup&>(std::as_const(*this).group(name));
}

std::vector<std::string> ParamStore::group_names() const {
  std::vector<std::string> out;
  for (const auto& g : groups_) out.push_back(g.name());
  return out;
}

std::map<std::string, std::uint64_t> ParamStore::hashes() const {
  std::map<std::string, std::uint64_t> out;
  for (const auto& g : groups_) out[g.name()] = g.content_hash();
  return out;
}

void ParamStore::zero_grad() {
  for (auto& g : groups_) g.zero_grad();
}

std::size_t ParamStore::numel() const {
  std::size_t n = 0;
  for (const auto& g : groups_) n += g.numel();
  return n;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const ParamStore& store,
                     const std::map<std::string, std::string>& meta) {
  std::map<std::string, const Tensor*> sorted;
  for (const auto& g : store.groups())
    for (const auto& nt : g.tensors()) sorted[g.name() + "/" + nt.name] = &nt.tensor;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out << kCheckpointMagic << '\n';
  for (const auto& [k, v] : meta) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw ContractError("checkpoint meta must be single-line, key without spaces: " + k);
    }
    out << "meta " << k << ' ' << v << '\n';
  }
  char buf[64];
  for (const auto& [key, t] : sorted) {
    out << "tensor " << key << ' ' << t->rows() << ' ' << t->cols() << '\n';
    auto d = t->data();
    for (std::size_t r = 0; r < t->rows(); ++r) {
      for (std::size_t c = 0; c < t->cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%a", d[r * t->cols() + c]);
        if (c) out << ' ';
        out << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw InputError("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != kCheckpointMagic) {
    throw VersionError("not a " + std::string(kCheckpointMagic) + " file: " + path.string());
  }
  Checkpoint ck;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("meta ", 0) == 0) {
      const auto sp = line.find(' ', 5);
      if (sp == std::string::npos) {
        ck.meta[line.substr(5)] = "";
      } else {
        ck.meta[line.substr(5, sp - 5)] = line.substr(sp + 1);
      }
      continue;
    }
    if (line.rfind("tensor ", 0) != 0) throw ParseError("unexpected checkpoint record", lineno);
    std::istringstream hdr(line.substr(7));
    std::string key;
    std::size_t rows = 0, cols = 0;
    if (!(hdr >> key >> rows >> cols)) throw ParseError("bad tensor header", lineno);
    std::vector<double> values;
    values.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw ParseError("truncated tensor " + key, lineno);
      ++lineno;
      std::istringstream row(line);
      std::string tok;
      std::size_t c = 0;
      while (row >> tok) {
        char* end = nullptr;
        values.push_back(std::strtod(tok.c_str(), &end));
        if (end == tok.c_str() || *end != '\0') throw ParseError("bad value '" + tok + "'", lineno);
        ++c;
      }
      if (c != cols) throw ParseError("row width mismatch in " + key, lineno);
    }
    ck.tensors.emplace(key, Tensor::from(rows, cols, std::move(values)));
  }
  return ck;
}

void load_into(const Checkpoint& ckpt, ParamStore& store) {
  std::size_t expected = 0;
  for (auto& g : store.groups()) {
    for (auto& nt : g.tensors()) {
      ++expected;
      const std::string key = g.name() + "/" + nt.name;
      auto it = ckpt.tensors.find(key);
      if (it == ckpt.tensors.end()) throw VersionError("checkpoint lacks tensor " + key);
      if (it->second.rows() != nt.tensor.rows() || it->second.cols() != nt.tensor.cols()) {
        throw VersionError("checkpoint shape mismatch for " + key + ": " +
                           it->second.shape_str() + " vs " + nt.tensor.shape_str());
      }
      auto src = it->second.data();
      std::copy(src.begin(), src.end(), nt.tensor.mutable_data().begin());
    }
  }
  if (expected != ckpt.tensors.size()) {
    throw VersionError("checkpoint has " + std::to_string(ckpt.tensors.size()) +
                       " tensors, model expects " + std::to_string(expected));
  }
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

std::vector<double> finite_diff_grad(const ScalarFn& f, Tensor& param, double eps) {
  if (!(eps > 0.0)) throw ContractError("finite_diff_grad: eps must be positive");
  NoGradGuard no_grad;
  auto data = param.mutable_data();
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double saved = data[i];
    data[i] = saved + eps;
    const double up = f();
    data[i] = saved - eps;
    const double down = f();
    data[i] = saved;
    out[i] = (up - down) / (2.0 * eps);
  }
  return out;
}

std::vector<std::vector<double>> finite_diff_grad(const ScalarFn& f, ParamGroup& params,
                                                  double eps) {
  std::vector<std::vector<double>> out;
  for (auto& nt : params.tensors()) out.push_back(finite_diff_grad(f, nt.tensor, eps));
  return out;
}

double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                          double floor) {
  if (analytic.size() != numeric.size()) throw ShapeError("max_relative_error: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], b = numeric[i];
    const double denom = std::max({std::abs(a), std::abs(b), floor});
    worst = std::max(worst, std::abs(a - b) / denom);
  }
  return worst;
}

}  // namespace mpgui
