#pragma once

#include "zv/synthetic.hpp"

namespace zv {

enum class TaskKind { Captioning, Vqa, Grounding, GroundedCaption };

const char* task_name(TaskKind t);

struct MultitaskRecord {
    TaskKind task = TaskKind::Captioning;
    int concept_id = -1;
    std::vector<int> caption;  // ends with eos
    std::vector<int> question;
    int answer_token = -1;
    std::array<double, 4> box{};
    std::vector<int> tag;
};

// Token sequence plus a loss mask: true marks the instruction prefix, which
// never contributes loss; response positions do.
struct FormattedExample {
    std::vector<int> tokens;                 // starts with bos, ends with eos
    std::vector<uint8_t> instruction_mask;   // aligned with tokens

    // Instruction span handed to the instruction-aware Q-Former forward.
    std::vector<int> instruction_tokens() const;
};

MultitaskRecord make_multitask_record(const SyntheticCorpus& corpus, TaskKind task, int concept_id,
                                      Lang lang);

// Grounding responses serialize boxes as integer-quantized tuples over the
// 0..99 grid; the vocabulary must carry coordinate tokens for those tasks.
FormattedExample format_multitask_example(TaskKind task, const MultitaskRecord& record,
                                          const TokenMap& tokens);

// Multi-turn dialogue for the scene-aware stage: user spans are loss-masked,
// assistant spans contribute.
FormattedExample make_dialogue_example(const SyntheticCorpus& corpus, int concept_id, int turns,
                                       Rng& rng);

}  // namespace zv
