#include "zv/manifest.hpp"

#include <chrono>
#include <ctime>

#include "zv/evalkit/report.hpp"

namespace zv {

std::string iso8601_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["argv"] = argv;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["build_id"] = build_id;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["artifacts"] = artifacts;
    j["exit_status"] = exit_status;
    j["final_metrics"] = final_metrics;
    if (!scale_note.empty()) j["scale_note"] = scale_note;
    return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
    eval::write_json(path, to_json());
}

}  // namespace zv
