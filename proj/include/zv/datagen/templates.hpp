#pragma once

#include <filesystem>
#include <map>

#include "zv/datagen/types.hpp"

namespace zv::datagen {

// System-message texts ship as versioned template files, one per job kind
// and one per rewrite clause.
struct TemplateSet {
    int version = 0;
    std::map<JobKind, std::string> kinds;
    std::map<RewriteScheme, std::string> rewrites;

    static std::filesystem::path default_dir();
    static TemplateSet load(const std::filesystem::path& dir);

    const std::string& kind(JobKind k) const { return kinds.at(k); }
    const std::string& rewrite(RewriteScheme r) const { return rewrites.at(r); }
};

}  // namespace zv::datagen
