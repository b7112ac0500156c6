#include "zv/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace zv {

namespace {
std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
}  // namespace

IniConfig IniConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file: {}", path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path.string());
}

IniConfig IniConfig::from_string(const std::string& text, const std::string& origin) {
    IniConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            require(s.back() == ']', "{}:{}: malformed section header '{}'", origin, lineno, s);
            section = trim(s.substr(1, s.size() - 2));
            require(!section.empty(), "{}:{}: empty section name", origin, lineno);
            cfg.sections_[section];
            continue;
        }
        size_t eq = s.find('=');
        require(eq != std::string::npos, "{}:{}: expected 'key = value', got '{}'", origin, lineno,
                s);
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        // strip inline comments
        size_t hash = value.find(" #");
        if (hash != std::string::npos) value = trim(value.substr(0, hash));
        require(!key.empty(), "{}:{}: empty key", origin, lineno);
        require(!section.empty(), "{}:{}: key '{}' outside any [section]", origin, lineno, key);
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool IniConfig::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string IniConfig::get_str(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return fallback;
    auto kt = it->second.find(key);
    return kt == it->second.end() ? fallback : kt->second;
}

long IniConfig::get_int(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = sections_.at(section).at(key);
    try {
        size_t pos = 0;
        long r = std::stol(v, &pos);
        require(pos == v.size(), "config [{}] {}: '{}' is not an integer", section, key, v);
        return r;
    } catch (const std::invalid_argument&) {
        fail("config [{}] {}: '{}' is not an integer", section, key, v);
    }
}

double IniConfig::get_real(const std::string& section, const std::string& key,
                           double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = sections_.at(section).at(key);
    try {
        size_t pos = 0;
        double r = std::stod(v, &pos);
        require(pos == v.size(), "config [{}] {}: '{}' is not a number", section, key, v);
        return r;
    } catch (const std::invalid_argument&) {
        fail("config [{}] {}: '{}' is not a number", section, key, v);
    }
}

bool IniConfig::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = sections_.at(section).at(key);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail("config [{}] {}: '{}' is not a boolean", section, key, v);
}

void IniConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}

uint64_t IniConfig::content_hash() const {
    uint64_t h = kFnvOffset;
    for (const auto& [sec, kv] : sections_) {
        h = fnv1a64(sec, h);
        h = fnv1a64("\x1f", h);
        for (const auto& [k, v] : kv) {
            h = fnv1a64(k, h);
            h = fnv1a64("\x1e", h);
            h = fnv1a64(v, h);
            h = fnv1a64("\x1e", h);
        }
    }
    return h;
}

}  // namespace zv
