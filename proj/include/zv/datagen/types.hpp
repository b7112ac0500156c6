#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zv/common.hpp"

namespace zv::datagen {

using ordered_json = nlohmann::ordered_json;

enum class JobKind { Conversation, DetailDescription, ComplexReasoning, Translation };
enum class RewriteScheme { Deepening, Concretizing, IncreasingReasoning, AddingConstraints };

const char* kind_name(JobKind k);
JobKind parse_kind(const std::string& s);
const char* rewrite_name(RewriteScheme r);
RewriteScheme parse_rewrite(const std::string& s);

struct BoxAnnotation {
    std::string tag;
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

// Symbolic scene annotations: captions plus tagged boxes. Detection models
// run upstream; their output arrives precomputed in this shape.
struct SymbolicImage {
    std::string image_id;
    std::vector<std::string> captions;
    std::vector<BoxAnnotation> boxes;

    void validate() const;
    ordered_json to_json() const;
    static SymbolicImage from_json(const ordered_json& j);
};

struct Exemplar {
    SymbolicImage image;
    std::string instruction;
    std::string response;
};

// English pair to be translated; Translation jobs carry this instead of a
// bare query image.
struct SourcePair {
    std::string instruction;
    std::string response;
    std::string source_image_id;
};

struct GenerationJob {
    uint64_t id = 0;
    JobKind kind = JobKind::Conversation;
    std::optional<RewriteScheme> rewrite;
    std::vector<Exemplar> exemplars;  // 1..8
    std::optional<SymbolicImage> query;
    std::optional<SourcePair> source;
    std::string target_language = "en";  // en | zh

    void validate() const;
};

struct ProvenanceEntry {
    std::string kind;
    std::optional<std::string> rewrite;
    std::vector<std::string> exemplar_ids;
    std::string client_id;
    uint64_t timestamp = 0;  // logical sequence number; wall clock stays in the run manifest

    ordered_json to_json() const;
    static ProvenanceEntry from_json(const ordered_json& j);
};

struct FilterVerdict {
    bool pass = false;
    std::vector<std::string> violations;
};

struct InstructionResponsePair {
    std::string instruction;
    std::string response;
    std::string language;  // en | zh
    std::string source_image_id;
    std::vector<ProvenanceEntry> provenance;
    FilterVerdict filter_verdict;

    ordered_json to_json() const;
    static InstructionResponsePair from_json(const ordered_json& j);
};

struct Message {
    std::string role;  // user | assistant
    std::string content;
};

}  // namespace zv::datagen
