#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "zv/common.hpp"

namespace zv {

// Minimal INI-style config: [section] headers, key = value pairs, '#'
// comments. One file is shared by every subcommand; CLI flags override
// values via set(). content_hash() covers the effective values, so two runs
// with the same file and overrides hash identically.
class IniConfig {
public:
    IniConfig() = default;

    static IniConfig from_file(const std::filesystem::path& path);
    static IniConfig from_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;

    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback) const;
    long get_int(const std::string& section, const std::string& key, long fallback) const;
    double get_real(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    uint64_t content_hash() const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::string origin_;
};

}  // namespace zv
