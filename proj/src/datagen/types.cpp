#include "zv/datagen/types.hpp"

namespace zv::datagen {

const char* kind_name(JobKind k) {
    switch (k) {
        case JobKind::Conversation: return "conversation";
        case JobKind::DetailDescription: return "detail_description";
        case JobKind::ComplexReasoning: return "complex_reasoning";
        case JobKind::Translation: return "translation";
    }
    return "?";
}

JobKind parse_kind(const std::string& s) {
    if (s == "conversation") return JobKind::Conversation;
    if (s == "detail_description") return JobKind::DetailDescription;
    if (s == "complex_reasoning") return JobKind::ComplexReasoning;
    if (s == "translation") return JobKind::Translation;
    fail("unknown job kind '{}'", s);
}

const char* rewrite_name(RewriteScheme r) {
    switch (r) {
        case RewriteScheme::Deepening: return "deepening";
        case RewriteScheme::Concretizing: return "concretizing";
        case RewriteScheme::IncreasingReasoning: return "increasing_reasoning";
        case RewriteScheme::AddingConstraints: return "adding_constraints";
    }
    return "?";
}

RewriteScheme parse_rewrite(const std::string& s) {
    if (s == "deepening") return RewriteScheme::Deepening;
    if (s == "concretizing") return RewriteScheme::Concretizing;
    if (s == "increasing_reasoning") return RewriteScheme::IncreasingReasoning;
    if (s == "adding_constraints") return RewriteScheme::AddingConstraints;
    fail("unknown rewrite scheme '{}'", s);
}

void SymbolicImage::validate() const {
    require(!image_id.empty(), "symbolic image needs an image_id");
    require(!captions.empty(), "symbolic image {}: captions must be nonempty", image_id);
    for (const auto& b : boxes) {
        require(b.x1 < b.x2 && b.y1 < b.y2,
                "symbolic image {}: box '{}' ({}, {}, {}, {}) violates x1 < x2, y1 < y2",
                image_id, b.tag, b.x1, b.y1, b.x2, b.y2);
    }
}

ordered_json SymbolicImage::to_json() const {
    ordered_json j;
    j["image_id"] = image_id;
    j["captions"] = captions;
    j["boxes"] = ordered_json::array();
    for (const auto& b : boxes) {
        ordered_json bj;
        bj["tag"] = b.tag;
        bj["x1"] = b.x1;
        bj["y1"] = b.y1;
        bj["x2"] = b.x2;
        bj["y2"] = b.y2;
        j["boxes"].push_back(std::move(bj));
    }
    return j;
}

SymbolicImage SymbolicImage::from_json(const ordered_json& j) {
    SymbolicImage img;
    img.image_id = j.at("image_id").get<std::string>();
    img.captions = j.at("captions").get<std::vector<std::string>>();
    if (j.contains("boxes")) {
        for (const auto& bj : j.at("boxes")) {
            BoxAnnotation b;
            b.tag = bj.at("tag").get<std::string>();
            b.x1 = bj.at("x1").get<double>();
            b.y1 = bj.at("y1").get<double>();
            b.x2 = bj.at("x2").get<double>();
            b.y2 = bj.at("y2").get<double>();
            img.boxes.push_back(std::move(b));
        }
    }
    img.validate();
    return img;
}

void GenerationJob::validate() const {
    require(!exemplars.empty() && exemplars.size() <= 8,
            "job {}: exemplar count {} outside [1, 8]", id, exemplars.size());
    for (const auto& e : exemplars) e.image.validate();
    require(target_language == "en" || target_language == "zh",
            "job {}: target language '{}' must be en or zh", id, target_language);
    if (kind == JobKind::Translation) {
        require(source.has_value() && !query.has_value(),
                "job {}: translation jobs carry a source pair, not a query image", id);
    } else {
        require(query.has_value() && !source.has_value(),
                "job {}: generation jobs need a query image", id);
        query->validate();
    }
}

ordered_json ProvenanceEntry::to_json() const {
    ordered_json j;
    j["kind"] = kind;
    j["rewrite"] = rewrite.has_value() ? ordered_json(*rewrite) : ordered_json(nullptr);
    j["exemplar_ids"] = exemplar_ids;
    j["client_id"] = client_id;
    j["timestamp"] = timestamp;
    return j;
}

ProvenanceEntry ProvenanceEntry::from_json(const ordered_json& j) {
    ProvenanceEntry e;
    e.kind = j.at("kind").get<std::string>();
    if (!j.at("rewrite").is_null()) e.rewrite = j.at("rewrite").get<std::string>();
    e.exemplar_ids = j.at("exemplar_ids").get<std::vector<std::string>>();
    e.client_id = j.at("client_id").get<std::string>();
    e.timestamp = j.at("timestamp").get<uint64_t>();
    return e;
}

ordered_json InstructionResponsePair::to_json() const {
    ordered_json j;
    j["instruction"] = instruction;
    j["response"] = response;
    j["language"] = language;
    j["source_image_id"] = source_image_id;
    j["provenance"] = ordered_json::array();
    for (const auto& p : provenance) j["provenance"].push_back(p.to_json());
    j["filter_verdict"]["pass"] = filter_verdict.pass;
    j["filter_verdict"]["violations"] = filter_verdict.violations;
    return j;
}

InstructionResponsePair InstructionResponsePair::from_json(const ordered_json& j) {
    InstructionResponsePair p;
    p.instruction = j.at("instruction").get<std::string>();
    p.response = j.at("response").get<std::string>();
    p.language = j.at("language").get<std::string>();
    p.source_image_id = j.at("source_image_id").get<std::string>();
    for (const auto& pj : j.at("provenance")) p.provenance.push_back(ProvenanceEntry::from_json(pj));
    p.filter_verdict.pass = j.at("filter_verdict").at("pass").get<bool>();
    p.filter_verdict.violations =
        j.at("filter_verdict").at("violations").get<std::vector<std::string>>();
    return p;
}

}  // namespace zv::datagen
