#pragma once

#include <optional>
#include <vector>

#include "zv/rng.hpp"
#include "zv/tensor.hpp"

namespace zv {

// Non-differentiable boolean matrix, used for attention masks.
struct BoolMat {
    int rows = 0, cols = 0;
    std::vector<uint8_t> v;

    BoolMat() = default;
    BoolMat(int r, int c, bool fill = false)
        : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill ? 1 : 0) {}

    bool at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c] != 0; }
    void set(int r, int c, bool b) { v[static_cast<size_t>(r) * cols + c] = b ? 1 : 0; }
    bool operator==(const BoolMat&) const = default;
};

// All ops are deterministic, store float32 and accumulate reductions in
// float64. An op whose inputs are all detached produces a detached output.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float c);
// [m x n] + [n], broadcast over rows (bias add).
Tensor add_rowvec(const Tensor& a, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor slice_rows(const Tensor& a, int start, int count);
Tensor slice_cols(const Tensor& a, int start, int count);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);

Tensor softmax_rows(const Tensor& x);
Tensor softmax_rows(const Tensor& x, const BoolMat& mask);

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps);
Tensor gelu(const Tensor& x);

// Mean NLL over positions whose target != ignore_index; always >= 0.
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets, int ignore_index);

// Row lookup: out[i] = table[ids[i]].
Tensor embed(const Tensor& table, const std::vector<int>& ids);

Tensor mean_rows(const Tensor& x);      // [m x n] -> [1 x n]
Tensor max_over_rows(const Tensor& x);  // [m x n] -> [1 x n], column-wise max
Tensor l2_normalize_rows(const Tensor& x);
// x / s with a learnable single-element scalar s.
Tensor div_by_scalar(const Tensor& x, const Tensor& s);

Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);

// rate = 0 is an exact pass-through; otherwise seeded inverted dropout.
Tensor dropout(const Tensor& x, float rate, Rng& rng);

}  // namespace zv
