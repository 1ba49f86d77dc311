// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>

namespace mpgui::data {

// Every prompt is instantiated from exactly one registered template.
// Placeholders: {ref} free text, {bbox} and {bbox2} scaled "[l,t,r,b]" boxes.
enum class TemplateId {
  Text2Bbox,
  Bbox2Text,
  Srp,
  SpeText,
  SpeIcon,
  SpeLocation,
  GlobalDesc,
  LocalDesc,
};

struct PromptTemplate {
  TemplateId id;
  std::string_view key;
  std::string_view text;
};

inline constexpr std::string_view kImagePlaceholder = "<image>\n";

std::span<const PromptTemplate> all_templates();
const PromptTemplate& get_template(TemplateId id);
const PromptTemplate& get_template(std::string_view key);

struct TemplateArgs {
  std::string ref{};
  std::string bbox{};
  std::string bbox2{};
};

std::string instantiate(TemplateId id, const TemplateArgs& args);

// The prompt minus the leading image placeholder: the text the decoder sees
// as question tokens.
std::string_view question_text(std::string_view prompt);

}  // namespace mpgui::data
