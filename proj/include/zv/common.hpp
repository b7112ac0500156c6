#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace zv {

template <typename... Args>
[[noreturn]] inline void fail(fmt::format_string<Args...> f, Args&&... args) {
    throw std::invalid_argument(fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
[[noreturn]] inline void fail_runtime(fmt::format_string<Args...> f, Args&&... args) {
    throw std::runtime_error(fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
inline void require(bool ok, fmt::format_string<Args...> f, Args&&... args) {
    if (!ok) fail(f, std::forward<Args>(args)...);
}

inline std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

// FNV-1a, used for config hashes, parameter-group hashes and seed mixing.
inline constexpr uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

inline uint64_t fnv1a64_bytes(const void* data, size_t n, uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = kFnvOffset) {
    return fnv1a64_bytes(s.data(), s.size(), h);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t buf[2] = {seed, stream};
    return fnv1a64_bytes(buf, sizeof(buf));
}

inline std::string hex64(uint64_t v) { return fmt::format("{:016x}", v); }

}  // namespace zv
