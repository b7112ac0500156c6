#include "zv/multitask.hpp"

namespace zv {

const char* task_name(TaskKind t) {
    switch (t) {
        case TaskKind::Captioning: return "captioning";
        case TaskKind::Vqa: return "vqa";
        case TaskKind::Grounding: return "grounding";
        case TaskKind::GroundedCaption: return "grounded_caption";
    }
    return "?";
}

std::vector<int> FormattedExample::instruction_tokens() const {
    std::vector<int> out;
    for (size_t i = 0; i < tokens.size(); ++i)
        if (instruction_mask[i]) out.push_back(tokens[i]);
    return out;
}

MultitaskRecord make_multitask_record(const SyntheticCorpus& corpus, TaskKind task, int concept_id,
                                      Lang lang) {
    require(concept_id >= 0 && concept_id < corpus.num_concepts, "concept {} outside [0, {})", concept_id,
            corpus.num_concepts);
    const auto& c = corpus.concepts[static_cast<size_t>(concept_id)];
    MultitaskRecord r;
    r.task = task;
    r.concept_id = concept_id;
    r.caption = corpus.caption(concept_id, lang);
    r.question = c.question;
    r.answer_token = c.answer_token;
    r.box = c.box;
    r.tag = c.tag;
    return r;
}

namespace {

// Task markers come from the head of the en word range, below the corpus
// content offset.
int task_marker(const TokenMap& tm, TaskKind t) {
    return tm.word(Lang::En, static_cast<int>(t));
}

void push(FormattedExample& ex, int token, bool instruction) {
    ex.tokens.push_back(token);
    ex.instruction_mask.push_back(instruction ? 1 : 0);
}

void push_all(FormattedExample& ex, const std::vector<int>& toks, bool instruction) {
    for (int t : toks) push(ex, t, instruction);
}

void check_box(const std::array<double, 4>& b) {
    require(b[0] < b[2] && b[1] < b[3] && b[0] >= 0.0 && b[1] >= 0.0 && b[2] <= 1.0 && b[3] <= 1.0,
            "malformed record: box ({}, {}, {}, {}) is not a valid region", b[0], b[1], b[2],
            b[3]);
}

}  // namespace

FormattedExample format_multitask_example(TaskKind task, const MultitaskRecord& record,
                                          const TokenMap& tokens) {
    FormattedExample ex;
    push(ex, kBos, true);
    push(ex, task_marker(tokens, task), true);
    switch (task) {
        case TaskKind::Captioning:
            require(!record.caption.empty(), "malformed record: captioning needs a caption");
            push(ex, kSep, true);
            push_all(ex, record.caption, false);
            break;
        case TaskKind::Vqa:
            require(!record.question.empty() && record.answer_token >= 0,
                    "malformed record: vqa needs question and answer");
            push_all(ex, record.question, true);
            push(ex, kSep, true);
            push(ex, record.answer_token, false);
            push(ex, kEos, false);
            break;
        case TaskKind::Grounding: {
            require(!record.tag.empty(), "malformed record: grounding needs a tag");
            check_box(record.box);
            push_all(ex, record.tag, true);
            push(ex, kSep, true);
            push_all(ex, encode_box(tokens, record.box[0], record.box[1], record.box[2],
                                    record.box[3]),
                     false);
            push(ex, kEos, false);
            break;
        }
        case TaskKind::GroundedCaption: {
            require(!record.caption.empty(), "malformed record: grounded captioning needs a caption");
            check_box(record.box);
            push_all(ex, encode_box(tokens, record.box[0], record.box[1], record.box[2],
                                    record.box[3]),
                     true);
            push(ex, kSep, true);
            push_all(ex, record.caption, false);
            break;
        }
    }
    return ex;
}

FormattedExample make_dialogue_example(const SyntheticCorpus& corpus, int concept_id, int turns,
                                       Rng& rng) {
    require(turns >= 1, "dialogue needs at least one turn");
    const auto& c = corpus.concepts[static_cast<size_t>(concept_id)];
    const TokenMap& tm = corpus.tokens;
    FormattedExample ex;
    push(ex, kBos, true);
    for (int turn = 0; turn < turns; ++turn) {
        // user: question-flavored span
        push_all(ex, c.question, true);
        push(ex, turn == 0 ? tm.word(Lang::En, 1) : tm.word(Lang::En, 2), true);
        push(ex, kSep, true);
        // assistant: caption-flavored answer
        Lang lang = rng.uniform() < 0.5 ? Lang::En : Lang::Zh;
        const auto& caption = corpus.caption(concept_id, lang);
        for (size_t i = 0; i + 1 < caption.size(); ++i) push(ex, caption[i], false);
        push(ex, turn + 1 == turns ? kEos : kSep, false);
    }
    return ex;
}

}  // namespace zv
