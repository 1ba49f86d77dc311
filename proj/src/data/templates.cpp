// Copyright (C) 2026 The mpgui Authors
// SPDX-License-Identifier: Apache-2.0

#include "mpgui/data/templates.hpp"

#include <array>

#include "mpgui/errors.hpp"

namespace mpgui::data {

namespace {

const std::array<PromptTemplate, 8> kTemplates{{
    {TemplateId::Text2Bbox, "text2bbox",
     "<image>\nPlease provide the bounding box coordinate of the region this sentence "
     "describes: <ref>{ref}</ref>"},
    {TemplateId::Bbox2Text, "bbox2text",
     "<image>\nDescribe the function within the selected area <box>{bbox}</box> of the "
     "image. answer with phrases rather than sentence."},
    {TemplateId::Srp, "srp",
     "<image>\nWhat is the spatial relationship between <box>{bbox}</box> and "
     "<box>{bbox2}</box>?"},
    {TemplateId::SpeText, "spe-text",
     "<image>\nWhat text is shown in <box>{bbox}</box>? Answer with numbers or phrases "
     "rather than sentence."},
    {TemplateId::SpeIcon, "spe-icon",
     "<image>\nWhat icon is shown in <box>{bbox}</box>? Answer with numbers or phrases "
     "rather than sentence."},
    {TemplateId::SpeLocation, "spe-location",
     "<image>\nWhich part of the screen is <ref>{ref}</ref> in? Answer with numbers or "
     "phrases rather than sentence."},
    {TemplateId::GlobalDesc, "global-desc",
     "<image>\nGenerate a summary of the screen in one sentence. Do not focus on "
     "specifically naming the various UI elements, but instead, focus on the content."},
    {TemplateId::LocalDesc, "local-desc",
     "<image>\nDescribe the marked component in <box>{bbox}</box> and the component it "
     "belongs to."},
}};

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::span<const PromptTemplate> all_templates() { return kTemplates; }

const PromptTemplate& get_template(TemplateId id) {
  for (const auto& t : kTemplates) {
    if (t.id == id) return t;
  }
  throw ContractError("unregistered template id");
}

const PromptTemplate& get_template(std::string_view key) {
  for (const auto& t : kTemplates) {
    if (t.key == key) return t;
  }
  throw ContractError("unregistered template '" + std::string(key) + "'");
}

std::string instantiate(TemplateId id, const TemplateArgs& args) {
  std::string out(get_template(id).text);
  replace_all(out, "{ref}", args.ref);
  replace_all(out, "{bbox2}", args.bbox2);
  replace_all(out, "{bbox}", args.bbox);
  return out;
}

std::string_view question_text(std::string_view prompt) {
  if (prompt.starts_with(kImagePlaceholder)) prompt.remove_prefix(kImagePlaceholder.size());
  return prompt;
}

}  // namespace mpgui::data
