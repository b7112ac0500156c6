#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "zv/common.hpp"

namespace zv {

// Deterministic RNG. All transforms are spelled out so that a given seed
// produces the same stream on every build of the same binary; nothing relies
// on the implementation-defined std distributions.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    int uniform_int(int n) {
        require(n > 0, "uniform_int needs n > 0, got {}", n);
        return static_cast<int>(uniform() * n);
    }

    // Box-Muller; one draw per call keeps the stream position predictable.
    double gaussian() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    float gaussianf(double stddev) { return static_cast<float>(gaussian() * stddev); }

    // Independent substream derived from the original seed, not the current
    // stream position, so forked consumers cannot perturb each other.
    Rng fork(uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace zv
