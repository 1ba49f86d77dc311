// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/model/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "mpgui/data/templates.hpp"
#include "mpgui/errors.hpp"
#include "mpgui/rng.hpp"

namespace mpgui::model {

namespace {

constexpr std::string_view kEos = "<eos>";
constexpr std::string_view kTags[] = {"<box>", "</box>", "<ref>", "</ref>"};
constexpr std::string_view kChars = "abcdefghijklmnopqrstuvwxyz0123456789 [],:.?-'";

bool is_tag(std::string_view s) {
  return std::find(std::begin(kTags), std::end(kTags), s) != std::end(kTags);
}

// Fixed segments of a template body, split at placeholders and tags.
std::vector<std::string> template_phrases(std::string_view body) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t i = 0;
  auto flush = [&] {
    if (cur.size() >= 4) out.push_back(cur);
    cur.clear();
  };
  while (i < body.size()) {
    if (body[i] == '{') {
      flush();
      i = body.find('}', i) + 1;
      continue;
    }
    bool tag = false;
    for (auto t : kTags) {
      if (body.substr(i).starts_with(t)) {
        flush();
        i += t.size();
        tag = true;
        break;
      }
    }
    if (tag) continue;
    cur.push_back(body[i++]);
  }
  flush();
  return out;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].empty()) throw ConfigError("empty vocabulary symbol");
    if (!index_.emplace(symbols_[i], static_cast<int>(i)).second) {
      throw ConfigError("duplicate vocabulary symbol '" + symbols_[i] + "'");
    }
    if (symbols_[i].size() > 1) multi_.push_back(static_cast<int>(i));
  }
  std::stable_sort(multi_.begin(), multi_.end(), [&](int a, int b) {
    return symbols_[a].size() > symbols_[b].size();
  });
  auto it = index_.find(std::string(kEos));
  if (it == index_.end()) throw ConfigError("vocabulary lacks <eos>");
  eos_ = it->second;
}

Vocab Vocab::standard() {
  std::vector<std::string> symbols{std::string(kEos)};
  for (auto t : kTags) symbols.emplace_back(t);
  for (char c : kChars) symbols.emplace_back(1, c);
  std::set<std::string> seen(symbols.begin(), symbols.end());
  for (const auto& t : data::all_templates()) {
    for (auto& p : template_phrases(data::question_text(t.text))) {
      if (seen.insert(p).second) symbols.push_back(std::move(p));
    }
  }
  return Vocab(std::move(symbols));
}

const std::string& Vocab::symbol(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw ContractError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return symbols_[id];
}

int Vocab::id_of(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) throw InputError("symbol '" + std::string(symbol) + "' not in vocabulary");
  return it->second;
}

std::vector<int> Vocab::encode(std::string_view text, bool phrases) const {
  std::vector<int> out;
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    for (int id : multi_) {
      const std::string& s = symbols_[id];
      if (!phrases && !is_tag(s)) continue;
      if (text.substr(i).starts_with(s)) {
        out.push_back(id);
        i += s.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
    auto it = index_.find(std::string(1, c));
    if (it == index_.end()) {
      throw InputError("character '" + std::string(1, text[i]) + "' not in vocabulary");
    }
    out.push_back(it->second);
    ++i;
  }
  return out;
}

std::vector<int> Vocab::encode_prompt(std::string_view text) const { return encode(text, true); }
std::vector<int> Vocab::encode_target(std::string_view text) const { return encode(text, false); }

std::string Vocab::decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id == eos_) break;
    out += symbol(id);
  }
  return out;
}

std::uint64_t Vocab::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& s : symbols_) {
    h = fnv1a(s, h);
    h = fnv1a("\x1f", 1, h);
  }
  return h;
}

}  // namespace mpgui::model
