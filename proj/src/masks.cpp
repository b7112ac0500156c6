#include "zv/masks.hpp"

namespace zv {

const char* mask_mode_name(MaskMode mode) {
    switch (mode) {
        case MaskMode::ITC: return "itc";
        case MaskMode::ITG: return "itg";
        case MaskMode::ITM: return "itm";
        case MaskMode::INSTRUCTION: return "instruction";
    }
    return "?";
}

BoolMat build_attention_mask(MaskMode mode, int num_queries, int text_len) {
    require(num_queries >= 1, "attention mask needs num_queries >= 1, got {}", num_queries);
    require(text_len >= 0, "attention mask needs text_len >= 0, got {}", text_len);
    if (mode == MaskMode::ITG)
        require(text_len >= 1, "ITG mask requires nonempty text (text_len = 0)");

    int n = num_queries + text_len;
    BoolMat m(n, n, false);
    switch (mode) {
        case MaskMode::ITM:
        case MaskMode::INSTRUCTION:
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m.set(i, j, true);
            break;
        case MaskMode::ITC:
            for (int i = 0; i < num_queries; ++i)
                for (int j = 0; j < num_queries; ++j) m.set(i, j, true);
            for (int i = num_queries; i < n; ++i)
                for (int j = num_queries; j < n; ++j) m.set(i, j, true);
            break;
        case MaskMode::ITG:
            for (int i = 0; i < num_queries; ++i)
                for (int j = 0; j < num_queries; ++j) m.set(i, j, true);
            for (int t = 0; t < text_len; ++t) {
                int i = num_queries + t;
                for (int j = 0; j < num_queries; ++j) m.set(i, j, true);
                for (int j = 0; j <= t; ++j) m.set(i, num_queries + j, true);
            }
            break;
    }
    return m;
}

BoolMat decoder_attention_mask(int prefix_len, int token_len) {
    require(prefix_len >= 1, "decoder mask needs prefix_len >= 1, got {}", prefix_len);
    require(token_len >= 0, "decoder mask needs token_len >= 0, got {}", token_len);
    int n = prefix_len + token_len;
    BoolMat m(n, n, false);
    for (int i = 0; i < prefix_len; ++i)
        for (int j = 0; j < prefix_len; ++j) m.set(i, j, true);
    for (int t = 0; t < token_len; ++t) {
        int i = prefix_len + t;
        for (int j = 0; j < prefix_len; ++j) m.set(i, j, true);
        for (int j = 0; j <= t; ++j) m.set(i, prefix_len + j, true);
    }
    return m;
}

}  // namespace zv
