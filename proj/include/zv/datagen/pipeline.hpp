#pragma once

#include <filesystem>

#include "zv/datagen/clients.hpp"
#include "zv/rng.hpp"
#include "zv/datagen/filters.hpp"

namespace zv::datagen {

struct PipelineOptions {
    int parallelism = 1;        // deterministic single-worker mode at 1
    int max_retries = 2;        // client attempts = 1 + max_retries
    double min_call_interval_ms = 0.0;  // crude per-client rate limit
    uint64_t seed = 0;
    std::filesystem::path out_dir;
};

enum class JobOutcome { Pass, Reject, Failed };

struct JobResult {
    uint64_t job_id = 0;
    JobOutcome outcome = JobOutcome::Failed;
    std::vector<InstructionResponsePair> pairs;       // all parsed pairs with verdicts
    std::optional<std::string> raw_output;            // kept for parse failures
    std::optional<std::string> error;                 // client failure after retries
};

struct PipelineResult {
    size_t jobs = 0, passed = 0, rejected = 0, failed = 0;
    size_t pairs_written = 0, rejects_written = 0;
    std::map<std::string, size_t> rule_hits;
    std::filesystem::path pairs_path, rejects_path, summary_path;

    // Conservation: every job lands in exactly one bucket.
    size_t accounted() const { return passed + rejected + failed; }
};

// Worker pool over independent jobs. Pass/reject streams are written by a
// single consumer in job order, so fixed seeds replay byte-identically
// regardless of the parallelism. A job passes when at least one of its pairs
// clears the filters; a job with output but no passing pair is rejected; a
// client failure after retries marks the job failed.
PipelineResult generate_pairs(const std::vector<GenerationJob>& jobs, TeacherClient& client,
                              const FilterRules& rules, const TemplateSet& templates,
                              const PipelineOptions& opts);

// Single-pair translation: builds a Translation job from a passing source
// pair, extends its provenance chain and filters with the target rules.
InstructionResponsePair translate_pair(const InstructionResponsePair& source,
                                       TeacherClient& client, const FilterRules& rules,
                                       const TemplateSet& templates, const Exemplar& demo,
                                       uint64_t job_id);

// Seed exemplar pool (50 shipped synthetic pairs in the exemplar schema).
std::vector<Exemplar> load_exemplars(const std::filesystem::path& path);
std::filesystem::path default_exemplar_path();
std::vector<Exemplar> pick_exemplars(const std::vector<Exemplar>& pool, int count, zv::Rng& rng);

std::vector<SymbolicImage> load_symbolic_images(const std::filesystem::path& path);

}  // namespace zv::datagen
