#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zv/tensor.hpp"

namespace zv {

// Versioned checkpoint: magic "ZVFORGE1", a JSON manifest listing
// (name, shape, byte offset) per parameter, then the raw little-endian
// float32 payload. Save -> load -> save is byte-identical.
inline constexpr char kCheckpointMagic[9] = "ZVFORGE1";

struct ManifestEntry {
    std::string name;
    std::vector<int> shape;
    uint64_t offset = 0;  // into the payload region, in bytes
};

void save_checkpoint(const std::filesystem::path& path, const std::vector<Param*>& params);

// Loads values into matching params by name. Shapes must agree. Parameters
// with the "lora." prefix may be absent from the file (fresh adapters attach
// to older checkpoints); every other param must be present.
void load_checkpoint(const std::filesystem::path& path, const std::vector<Param*>& params);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

}  // namespace zv
