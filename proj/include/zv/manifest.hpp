#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace zv {

// One per subcommand run, written atomically at run end. Timestamps are the
// only fields excluded from reproducibility comparisons.
struct RunManifest {
    std::vector<std::string> argv;
    std::string config_hash;
    uint64_t seed = 0;
    std::string build_id;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> artifacts;
    int exit_status = 0;
    nlohmann::ordered_json final_metrics = nlohmann::ordered_json::object();
    std::string scale_note;

    nlohmann::ordered_json to_json() const;
    void write(const std::filesystem::path& path) const;
};

std::string iso8601_now();

}  // namespace zv
