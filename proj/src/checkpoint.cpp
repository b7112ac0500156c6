#include "zv/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

namespace zv {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload assumes a little-endian host");

using ordered_json = nlohmann::ordered_json;

void save_checkpoint(const std::filesystem::path& path, const std::vector<Param*>& params) {
    ordered_json manifest = ordered_json::array();
    uint64_t offset = 0;
    for (const Param* p : params) {
        ordered_json e;
        e["name"] = p->name;
        e["shape"] = p->shape();
        e["offset"] = offset;
        manifest.push_back(std::move(e));
        offset += p->size() * sizeof(float);
    }
    std::string mjson = manifest.dump();

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail_runtime("cannot open checkpoint file for writing: {}", path.string());
        out.write(kCheckpointMagic, 8);
        uint64_t msize = mjson.size();
        out.write(reinterpret_cast<const char*>(&msize), sizeof(msize));
        out.write(mjson.data(), static_cast<std::streamsize>(mjson.size()));
        for (const Param* p : params) {
            out.write(reinterpret_cast<const char*>(p->values().data()),
                      static_cast<std::streamsize>(p->size() * sizeof(float)));
        }
        if (!out) fail_runtime("write failed for checkpoint: {}", path.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace {

struct RawCheckpoint {
    std::vector<ManifestEntry> entries;
    std::vector<char> payload;
};

RawCheckpoint read_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_runtime("cannot open checkpoint: {}", path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        fail_runtime("{} is not a checkpoint (bad magic)", path.string());
    uint64_t msize = 0;
    in.read(reinterpret_cast<char*>(&msize), sizeof(msize));
    std::string mjson(msize, '\0');
    in.read(mjson.data(), static_cast<std::streamsize>(msize));
    if (!in) fail_runtime("truncated checkpoint manifest: {}", path.string());

    RawCheckpoint raw;
    auto manifest = ordered_json::parse(mjson);
    for (const auto& e : manifest) {
        ManifestEntry m;
        m.name = e.at("name").get<std::string>();
        m.shape = e.at("shape").get<std::vector<int>>();
        m.offset = e.at("offset").get<uint64_t>();
        raw.entries.push_back(std::move(m));
    }
    raw.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return raw;
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    return read_raw(path).entries;
}

void load_checkpoint(const std::filesystem::path& path, const std::vector<Param*>& params) {
    RawCheckpoint raw = read_raw(path);
    std::map<std::string, const ManifestEntry*> by_name;
    for (const auto& e : raw.entries) by_name[e.name] = &e;

    for (Param* p : params) {
        auto it = by_name.find(p->name);
        if (it == by_name.end()) {
            if (p->name.rfind("lora.", 0) == 0) continue;  // fresh adapter
            fail_runtime("checkpoint {} is missing parameter {}", path.string(), p->name);
        }
        const ManifestEntry& e = *it->second;
        require(e.shape == p->shape(), "checkpoint {}: parameter {} has shape {}, model wants {}",
                path.string(), p->name, shape_str(e.shape), shape_str(p->shape()));
        size_t bytes = p->size() * sizeof(float);
        if (e.offset + bytes > raw.payload.size())
            fail_runtime("checkpoint {}: payload truncated at parameter {}", path.string(),
                         p->name);
        std::memcpy(p->values().data(), raw.payload.data() + e.offset, bytes);
    }
}

}  // namespace zv
