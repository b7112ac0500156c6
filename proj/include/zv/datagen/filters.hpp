#pragma once

#include "zv/config.hpp"
#include "zv/datagen/types.hpp"

namespace zv::datagen {

// Rule-based acceptance rules. Each rule is a pure predicate; a verdict
// lists every violated rule id, so evaluation order never changes it.
//   R1  instruction length in [4, 512] chars, response in [1, 4096]
//   R2  response script matches the target language (>= 80% of letters)
//   R3  refusal-phrase blacklist
//   R4  coordinate tuples echoed in the text must be valid boxes
//   R5  instruction differs from response
//   R6  Conversation pairs carry speaker-alternating turns
struct FilterRules {
    size_t instruction_min = 4, instruction_max = 512;
    size_t response_min = 1, response_max = 4096;
    double script_ratio = 0.8;
    std::vector<std::string> refusal_phrases = {
        "as an ai", "as a language model", "i cannot assist", "i'm unable to",
        "作为一个人工智能", "作为语言模型"};

    static FilterRules from_config(const IniConfig& cfg);
};

FilterVerdict apply_filters(const InstructionResponsePair& pair, const FilterRules& rules);

// Script counting helper, exposed for tests: fraction of letter-class
// characters (ASCII alpha + CJK) that belong to the target script.
double script_match_fraction(const std::string& text, const std::string& language);

}  // namespace zv::datagen
