#include "zv/datagen/templates.hpp"

#include <fstream>
#include <sstream>

namespace zv::datagen {

namespace {

struct TemplateFile {
    int version = 0;
    std::string body;
};

TemplateFile read_template(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_runtime("missing template file: {}", path.string());
    std::string line;
    TemplateFile tf;
    bool have_version = false;
    std::ostringstream body;
    bool in_body = false;
    while (std::getline(in, line)) {
        if (!in_body) {
            if (line.rfind("version:", 0) == 0) {
                tf.version = std::stoi(line.substr(8));
                have_version = true;
                continue;
            }
            if (line.rfind("kind:", 0) == 0) continue;  // advisory marker
            if (line.empty()) {
                if (have_version) in_body = true;
                continue;
            }
            in_body = true;  // body starts immediately
        }
        body << line << "\n";
    }
    require(have_version && tf.version >= 1, "template {} lacks a 'version:' header",
            path.string());
    tf.body = body.str();
    while (!tf.body.empty() && tf.body.back() == '\n') tf.body.pop_back();
    require(!tf.body.empty(), "template {} has an empty body", path.string());
    return tf;
}

}  // namespace

std::filesystem::path TemplateSet::default_dir() {
    return std::filesystem::path(ZV_SOURCE_DIR) / "templates";
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    TemplateSet set;
    const std::pair<JobKind, const char*> kind_files[] = {
        {JobKind::Conversation, "conversation.txt"},
        {JobKind::DetailDescription, "detail_description.txt"},
        {JobKind::ComplexReasoning, "complex_reasoning.txt"},
        {JobKind::Translation, "translation.txt"},
    };
    const std::pair<RewriteScheme, const char*> rewrite_files[] = {
        {RewriteScheme::Deepening, "rewrite_deepening.txt"},
        {RewriteScheme::Concretizing, "rewrite_concretizing.txt"},
        {RewriteScheme::IncreasingReasoning, "rewrite_increasing_reasoning.txt"},
        {RewriteScheme::AddingConstraints, "rewrite_adding_constraints.txt"},
    };
    int version = 0;
    for (const auto& [kind, file] : kind_files) {
        TemplateFile tf = read_template(dir / file);
        version = std::max(version, tf.version);
        set.kinds[kind] = std::move(tf.body);
    }
    for (const auto& [rw, file] : rewrite_files) {
        TemplateFile tf = read_template(dir / file);
        version = std::max(version, tf.version);
        set.rewrites[rw] = std::move(tf.body);
    }
    set.version = version;
    return set;
}

}  // namespace zv::datagen
