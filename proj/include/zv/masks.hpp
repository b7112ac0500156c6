#pragma once

#include "zv/ops.hpp"

namespace zv {

// Self-attention visibility between the query rows and the text rows of a
// joint (Q+T)x(Q+T) sequence. INSTRUCTION shares the ITM layout: instruction
// tokens and queries are fully mutually visible.
enum class MaskMode { ITC, ITG, ITM, INSTRUCTION };

const char* mask_mode_name(MaskMode mode);

// Row i may attend to column j iff mask(i, j).
//   ITC: block-diagonal, queries<->queries and text<->text only.
//   ITG: queries see queries; text position t sees all queries and text <= t.
//   ITM / INSTRUCTION: fully visible.
BoolMat build_attention_mask(MaskMode mode, int num_queries, int text_len);

// Decoder visibility: prefix rows are mutually visible and blind to tokens;
// token t sees the whole prefix and tokens <= t.
BoolMat decoder_attention_mask(int prefix_len, int token_len);

}  // namespace zv
