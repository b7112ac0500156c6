#pragma once

#include <string>
#include <vector>

namespace zv::eval {

// Caption tokenizer: lowercase, ASCII punctuation stripped, whitespace
// split. No stemming.
std::vector<std::string> caption_tokens(const std::string& text);

// Answer normalization shared by the VQA metrics: lowercase, punctuation
// stripped, articles (a, an, the) removed, whitespace collapsed.
std::string normalize_answer(const std::string& text);

}  // namespace zv::eval
