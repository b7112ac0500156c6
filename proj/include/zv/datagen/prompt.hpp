#pragma once

#include "zv/datagen/templates.hpp"

namespace zv::datagen {

struct Prompt {
    std::string system;
    std::vector<Message> messages;  // alternating user/assistant, ends with the query user turn
};

// Box serialization inside user messages: "tag:(x1,y1,x2,y2)" with 3-decimal
// fixed point.
std::string serialize_symbolic_image(const SymbolicImage& image);

// Pure function of the job: exemplar turns in order, then the query turn.
// The system message is the kind template, suffixed with the rewrite clause
// when present and a target-language line.
Prompt build_prompt(const GenerationJob& job, const TemplateSet& templates);

// Parses fenced ```pair blocks with "instruction:" and "response:" fields;
// malformed completions yield an empty list.
std::vector<std::pair<std::string, std::string>> parse_teacher_output(const std::string& text);

}  // namespace zv::datagen
