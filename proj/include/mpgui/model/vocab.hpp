// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mpgui::model {

// Character-level tokenizer over a fixed symbol list.
//
// Symbols are single lowercase characters, box/ref tag sentinels, <eos>, and
// one phrase symbol per fixed instruction segment of each registered prompt
// template. Prompts are matched greedily (longest symbol first, exact case);
// anything else is lowercased and looked up character by character.
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(std::vector<std::string> symbols);

  // The shipped symbol list, derived from the template registry.
  static Vocab standard();

  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::string& symbol(int id) const;
  int id_of(std::string_view symbol) const;
  int eos() const { return eos_; }

  // Throws InputError on characters outside the vocabulary.
  std::vector<int> encode_prompt(std::string_view text) const;
  // Targets use characters and tag sentinels only (no phrase symbols).
  std::vector<int> encode_target(std::string_view text) const;
  // Stops at the first <eos>.
  std::string decode(std::span<const int> ids) const;

  std::uint64_t fingerprint() const;
  bool operator==(const Vocab& o) const { return symbols_ == o.symbols_; }

 private:
  std::vector<int> encode(std::string_view text, bool phrases) const;

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> multi_;  // ids of multi-character symbols, longest first
  int eos_ = -1;
};

}  // namespace mpgui::model
