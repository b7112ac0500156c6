#include "zv/datagen/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include "zv/evalkit/report.hpp"
#include "zv/rng.hpp"

namespace zv::datagen {

namespace {

std::string complete_with_retries(TeacherClient& client, const Prompt& prompt, int max_retries,
                                  std::string* error) {
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        try {
            return client.complete(prompt.system, prompt.messages);
        } catch (const std::exception& e) {
            if (attempt == max_retries) {
                *error = e.what();
                return "";
            }
        }
    }
    return "";
}

InstructionResponsePair assemble_pair(const GenerationJob& job, const std::string& client_id,
                                      const std::string& instruction,
                                      const std::string& response) {
    InstructionResponsePair pair;
    pair.instruction = instruction;
    pair.response = response;
    pair.language = job.target_language;
    pair.source_image_id = job.kind == JobKind::Translation ? job.source->source_image_id
                                                            : job.query->image_id;
    ProvenanceEntry prov;
    prov.kind = kind_name(job.kind);
    if (job.rewrite) prov.rewrite = rewrite_name(*job.rewrite);
    for (const auto& ex : job.exemplars) prov.exemplar_ids.push_back(ex.image.image_id);
    prov.client_id = client_id;
    prov.timestamp = job.id;
    pair.provenance.push_back(std::move(prov));
    return pair;
}

JobResult run_job(const GenerationJob& job, TeacherClient& client, const FilterRules& rules,
                  const TemplateSet& templates, int max_retries) {
    JobResult res;
    res.job_id = job.id;
    Prompt prompt = build_prompt(job, templates);
    std::string error;
    std::string output = complete_with_retries(client, prompt, max_retries, &error);
    if (!error.empty()) {
        res.outcome = JobOutcome::Failed;
        res.error = error;
        return res;
    }
    auto parsed = parse_teacher_output(output);
    if (parsed.empty()) {
        res.outcome = JobOutcome::Reject;
        res.raw_output = output;
        return res;
    }
    bool any_pass = false;
    for (const auto& [instruction, response] : parsed) {
        InstructionResponsePair pair =
            assemble_pair(job, client.identity(), instruction, response);
        pair.filter_verdict = apply_filters(pair, rules);
        any_pass = any_pass || pair.filter_verdict.pass;
        res.pairs.push_back(std::move(pair));
    }
    res.outcome = any_pass ? JobOutcome::Pass : JobOutcome::Reject;
    return res;
}

}  // namespace

PipelineResult generate_pairs(const std::vector<GenerationJob>& jobs, TeacherClient& client,
                              const FilterRules& rules, const TemplateSet& templates,
                              const PipelineOptions& opts) {
    require(opts.parallelism >= 1, "pipeline parallelism must be >= 1");
    for (const auto& job : jobs) job.validate();
    std::filesystem::create_directories(opts.out_dir);

    std::vector<JobResult> results(jobs.size());
    std::atomic<size_t> next{0};
    std::mutex rate_mutex;
    auto last_call = std::chrono::steady_clock::now() - std::chrono::hours(1);

    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            if (opts.min_call_interval_ms > 0.0) {
                std::unique_lock lock(rate_mutex);
                auto now = std::chrono::steady_clock::now();
                auto wait = std::chrono::duration<double, std::milli>(
                                opts.min_call_interval_ms) -
                            (now - last_call);
                if (wait.count() > 0)
                    std::this_thread::sleep_for(
                        std::chrono::duration<double, std::milli>(wait.count()));
                last_call = std::chrono::steady_clock::now();
            }
            results[i] = run_job(jobs[i], client, rules, templates, opts.max_retries);
        }
    };

    if (opts.parallelism == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < opts.parallelism; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Single consumer: streams written in job order.
    PipelineResult out;
    out.jobs = jobs.size();
    out.pairs_path = opts.out_dir / "pairs.jsonl";
    out.rejects_path = opts.out_dir / "rejects.jsonl";
    out.summary_path = opts.out_dir / "summary.json";

    std::ofstream pass_stream(out.pairs_path, std::ios::binary | std::ios::trunc);
    std::ofstream reject_stream(out.rejects_path, std::ios::binary | std::ios::trunc);
    if (!pass_stream || !reject_stream)
        fail_runtime("cannot open output streams under {}", opts.out_dir.string());

    for (const JobResult& res : results) {
        switch (res.outcome) {
            case JobOutcome::Pass: ++out.passed; break;
            case JobOutcome::Reject: ++out.rejected; break;
            case JobOutcome::Failed: ++out.failed; break;
        }
        if (res.outcome == JobOutcome::Failed) {
            ordered_json j;
            j["job_id"] = res.job_id;
            j["reason"] = "client_failed";
            j["error"] = *res.error;
            reject_stream << j.dump() << "\n";
            ++out.rejects_written;
            continue;
        }
        if (res.raw_output.has_value()) {  // parse failure
            ordered_json j;
            j["job_id"] = res.job_id;
            j["reason"] = "parse_error";
            j["raw"] = *res.raw_output;
            reject_stream << j.dump() << "\n";
            ++out.rejects_written;
            continue;
        }
        for (const auto& pair : res.pairs) {
            if (pair.filter_verdict.pass) {
                pass_stream << pair.to_json().dump() << "\n";
                ++out.pairs_written;
            } else {
                ordered_json j;
                j["job_id"] = res.job_id;
                j["reason"] = "filtered";
                j["pair"] = pair.to_json();
                reject_stream << j.dump() << "\n";
                ++out.rejects_written;
                for (const auto& rule : pair.filter_verdict.violations) ++out.rule_hits[rule];
            }
        }
    }
    pass_stream.close();
    reject_stream.close();

    ordered_json summary;
    summary["jobs"] = out.jobs;
    summary["passed"] = out.passed;
    summary["rejected"] = out.rejected;
    summary["failed"] = out.failed;
    summary["pairs_written"] = out.pairs_written;
    summary["rejects_written"] = out.rejects_written;
    ordered_json hits;
    for (const auto& [rule, count] : out.rule_hits) hits[rule] = count;
    summary["rule_hits"] = std::move(hits);
    eval::write_json(out.summary_path, summary);
    return out;
}

InstructionResponsePair translate_pair(const InstructionResponsePair& source,
                                       TeacherClient& client, const FilterRules& rules,
                                       const TemplateSet& templates, const Exemplar& demo,
                                       uint64_t job_id) {
    require(source.filter_verdict.pass, "translate_pair: source pair did not pass the filters");
    GenerationJob job;
    job.id = job_id;
    job.kind = JobKind::Translation;
    job.exemplars = {demo};
    job.source = SourcePair{source.instruction, source.response, source.source_image_id};
    job.target_language = "zh";

    Prompt prompt = build_prompt(job, templates);
    std::string output = client.complete(prompt.system, prompt.messages);
    auto parsed = parse_teacher_output(output);
    require(!parsed.empty(), "translate_pair: teacher output had no parseable pair block");

    InstructionResponsePair out;
    out.instruction = parsed[0].first;
    out.response = parsed[0].second;
    out.language = "zh";
    out.source_image_id = source.source_image_id;
    out.provenance = source.provenance;  // chain extended below
    ProvenanceEntry prov;
    prov.kind = kind_name(JobKind::Translation);
    prov.exemplar_ids = {demo.image.image_id};
    prov.client_id = client.identity();
    prov.timestamp = job_id;
    out.provenance.push_back(std::move(prov));
    out.filter_verdict = apply_filters(out, rules);
    return out;
}

std::filesystem::path default_exemplar_path() {
    return std::filesystem::path(ZV_SOURCE_DIR) / "data" / "seed_exemplars.jsonl";
}

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_runtime("cannot open exemplar file: {}", path.string());
    std::vector<Exemplar> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j = ordered_json::parse(line);
        Exemplar ex;
        ex.image = SymbolicImage::from_json(j.at("image"));
        ex.instruction = j.at("instruction").get<std::string>();
        ex.response = j.at("response").get<std::string>();
        out.push_back(std::move(ex));
    }
    require(!out.empty(), "exemplar file {} is empty", path.string());
    return out;
}

std::vector<Exemplar> pick_exemplars(const std::vector<Exemplar>& pool, int count, zv::Rng& rng) {
    require(count >= 1 && count <= 8, "exemplar count {} outside [1, 8]", count);
    require(!pool.empty(), "empty exemplar pool");
    std::vector<Exemplar> out;
    for (int i = 0; i < count; ++i)
        out.push_back(pool[static_cast<size_t>(rng.uniform_int(static_cast<int>(pool.size())))]);
    return out;
}

std::vector<SymbolicImage> load_symbolic_images(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_runtime("cannot open symbolic image file: {}", path.string());
    std::vector<SymbolicImage> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(SymbolicImage::from_json(ordered_json::parse(line)));
    }
    require(!out.empty(), "symbolic image file {} is empty", path.string());
    return out;
}

}  // namespace zv::datagen
