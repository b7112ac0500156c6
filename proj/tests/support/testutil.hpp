#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "zv/rng.hpp"
#include "zv/tensor.hpp"

namespace tu {

inline bool throws_with(const std::function<void()>& fn, const std::string& needle) {
    try {
        fn();
    } catch (const std::exception& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

inline std::vector<float> random_values(size_t n, zv::Rng& rng, double scale = 1.0) {
    std::vector<float> v(n);
    for (auto& x : v) x = rng.gaussianf(scale);
    return v;
}

inline zv::Param random_param(const std::string& name, std::vector<int> shape, zv::Rng& rng,
                              double scale = 1.0) {
    size_t n = 1;
    for (int e : shape) n *= static_cast<size_t>(e);
    return zv::Param(name, std::move(shape), random_values(n, rng, scale));
}

inline bool bits_equal(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) return false;
    return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Unique scratch directory per test binary run, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("zvforge_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace tu
