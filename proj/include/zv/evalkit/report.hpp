#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace zv::eval {

// Fixed-width text table with a header rule.
std::string render_table(const std::vector<std::string>& headers,
                         const std::vector<std::vector<std::string>>& rows);

// Atomic write (tmp + rename) of deterministic, timestamp-free JSON.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

}  // namespace zv::eval
