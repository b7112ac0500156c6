#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "zv/common.hpp"

namespace zv {

// Synthetic integer alphabet. Reserved ids 0..7; ids 4..6 serialize bounding
// boxes; coordinate tokens (one per grid cell of the 0..99 box grid) are only
// laid out when the vocabulary is large enough to hold them plus a usable
// word range. The word range is split into two disjoint halves to give
// captions an en/zh flavor without a real tokenizer.
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kSep = 3;
inline constexpr int kBoxOpen = 4;
inline constexpr int kBoxClose = 5;
inline constexpr int kBoxComma = 6;
inline constexpr int kReserved = 8;
inline constexpr int kCoordCells = 100;

enum class Lang { En, Zh };

struct TokenMap {
    int vocab_size = 0;
    bool has_coords = false;
    int coord_base = kReserved;
    int word_base = kReserved;
    int num_words = 0;

    explicit TokenMap(int vocab) : vocab_size(vocab) {
        require(vocab >= kReserved + 2, "vocab size {} leaves no word tokens", vocab);
        has_coords = vocab >= kReserved + kCoordCells + 16;
        word_base = has_coords ? kReserved + kCoordCells : kReserved;
        num_words = vocab - word_base;
    }

    int word(Lang lang, int i) const {
        int half = num_words / 2;
        int base = lang == Lang::En ? word_base : word_base + half;
        int span = lang == Lang::En ? half : num_words - half;
        return base + (i % span);
    }

    int coord_token(int cell) const {
        require(has_coords, "vocab size {} has no coordinate tokens (needs >= {})", vocab_size,
                kReserved + kCoordCells + 16);
        require(cell >= 0 && cell < kCoordCells, "coordinate cell {} outside [0, {})", cell,
                kCoordCells);
        return coord_base + cell;
    }

    bool is_coord(int tok) const {
        return has_coords && tok >= coord_base && tok < coord_base + kCoordCells;
    }
    int coord_cell(int tok) const { return tok - coord_base; }
};

// [0,1] -> {0..99}; 0.10 -> 10.
inline int quantize_coord(double v) {
    int q = static_cast<int>(std::lround(v * 99.0));
    return std::clamp(q, 0, kCoordCells - 1);
}

inline double dequantize_coord(int cell) { return static_cast<double>(cell) / 99.0; }

struct BoxTokens {
    std::array<int, 4> cells;
};

inline std::vector<int> encode_box(const TokenMap& tm, double x1, double y1, double x2, double y2) {
    std::vector<int> out;
    out.push_back(kBoxOpen);
    const double coords[4] = {x1, y1, x2, y2};
    for (int i = 0; i < 4; ++i) {
        if (i) out.push_back(kBoxComma);
        out.push_back(tm.coord_token(quantize_coord(coords[i])));
    }
    out.push_back(kBoxClose);
    return out;
}

// Parses the first serialized box in a token stream; nullopt when absent or
// malformed.
inline std::optional<BoxTokens> parse_box_tokens(const TokenMap& tm, const std::vector<int>& toks) {
    if (toks.size() < 9) return std::nullopt;
    for (size_t i = 0; i + 9 <= toks.size(); ++i) {
        if (toks[i] != kBoxOpen || toks[i + 8] != kBoxClose) continue;
        BoxTokens box{};
        bool ok = true;
        for (int c = 0; c < 4 && ok; ++c) {
            size_t pos = i + 1 + static_cast<size_t>(c) * 2;
            if (!tm.is_coord(toks[pos])) {
                ok = false;
                break;
            }
            box.cells[static_cast<size_t>(c)] = tm.coord_cell(toks[pos]);
            if (c < 3 && toks[pos + 1] != kBoxComma) ok = false;
        }
        if (ok) return box;
    }
    return std::nullopt;
}

}  // namespace zv
