#pragma once

#include <optional>
#include <string>

#include "zv/ops.hpp"
#include "zv/rng.hpp"

namespace zv {

// Low-rank delta attached to a linear map: y = W x + (alpha/r) B (A x).
// B starts all-zero, so a fresh adapter is an exact identity delta.
struct LoRAAdapter {
    Param a;  // [r x d_in]
    Param b;  // [d_out x r]
    int rank = 0;
    float alpha = 1.0f;
    std::string target;

    static LoRAAdapter make(const std::string& name, int d_in, int d_out, int rank, float alpha,
                            Rng& rng);
};

// Base linear map y = x W^T + bias, with an optional adapter. Base weights
// and the adapter belong to different parameter groups, so the trainable-set
// policy can open one without the other.
struct Linear {
    Param w;     // [out x in]
    Param bias;  // [out]
    std::optional<LoRAAdapter> lora;

    static Linear make(const std::string& name, int d_in, int d_out, Rng& rng);
    static Linear identity(const std::string& name, int d);

    int d_in() const { return w.shape()[1]; }
    int d_out() const { return w.shape()[0]; }

    // x: [rows x d_in] -> [rows x d_out]; includes the adapter when attached.
    Tensor apply(Tape& t, const Tensor& x) const;
};

// Adapter path alone made explicit; base W and bias receive no gradient when
// frozen, A and B always do while open.
Tensor lora_forward(Tape& t, const Linear& base, const LoRAAdapter& adapter, const Tensor& x);

// W' = W + (alpha/r) B A; returns a standalone merged map with no adapter.
Linear merge(const Linear& base, const LoRAAdapter& adapter);

}  // namespace zv
