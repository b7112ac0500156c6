#include "zv/cli.hpp"

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "zv/checkpoint.hpp"
#include "zv/datagen/clean.hpp"
#include "zv/datagen/pipeline.hpp"
#include "zv/evalkit/cider.hpp"
#include "zv/evalkit/judged.hpp"
#include "zv/evalkit/report.hpp"
#include "zv/evalkit/retrieval.hpp"
#include "zv/evalkit/vqa.hpp"
#include "zv/manifest.hpp"
#include "zv/trainer.hpp"

namespace zv {

namespace {

using ordered_json = nlohmann::ordered_json;

std::filesystem::path default_config_path() {
    return std::filesystem::path(ZV_SOURCE_DIR) / "configs" / "toy.ini";
}

IniConfig load_config(const std::string& path) {
    return IniConfig::from_file(path.empty() ? default_config_path()
                                             : std::filesystem::path(path));
}

SyntheticCorpus corpus_from_config(const IniConfig& cfg, const QFormerConfig& qc, uint64_t seed) {
    int k = static_cast<int>(cfg.get_int("train", "num_concepts", 16));
    double sigma = cfg.get_real("train", "noise_sigma", 0.05);
    double margin = cfg.get_real("train", "margin", 4.0);
    return SyntheticCorpus::make(k, qc.image_patches, qc.image_feat_dim, qc.vocab_size,
                                 mix_seed(seed, 0x636f7270ull), sigma, margin);
}

std::string scale_note(const TrainConfig& tc) {
    if (tc.batch_size == 2048 && tc.max_steps == 90000) return "";
    return fmt::format(
        "desk-scale profile: batch_size={} max_steps={}; the full-scale preset "
        "(batch_size=2048, max_steps=90000) is configs/full.ini",
        tc.batch_size, tc.max_steps);
}

std::vector<ordered_json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_runtime("cannot open {}", path.string());
    std::vector<ordered_json> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(ordered_json::parse(line));
        } catch (const std::exception& e) {
            fail("{}:{}: invalid json: {}", path.string(), lineno, e.what());
        }
    }
    return out;
}

struct ManifestScope {
    RunManifest manifest;
    std::filesystem::path path;
    bool armed = false;

    void arm(const std::filesystem::path& dir, const std::vector<std::string>& argv,
             uint64_t config_hash, uint64_t seed) {
        std::filesystem::create_directories(dir);
        path = dir / "run_manifest.json";
        manifest.argv = argv;
        manifest.config_hash = hex64(config_hash);
        manifest.seed = seed;
        manifest.build_id = ZV_BUILD_ID;
        manifest.started_at = iso8601_now();
        armed = true;
    }
    void finish(int status) {
        if (!armed) return;
        manifest.exit_status = status;
        manifest.finished_at = iso8601_now();
        manifest.write(path);
    }
};

int cmd_train(const std::vector<std::string>& argv, const std::string& config_path,
              const std::string& stage_s, const std::string& profile_s,
              const std::string& resume, const std::string& out_dir, long seed_flag,
              ManifestScope& scope) {
    IniConfig cfg = load_config(config_path);
    if (seed_flag >= 0) cfg.set("train", "seed", std::to_string(seed_flag));

    Stage stage = parse_stage(stage_s);
    Profile profile = parse_profile(profile_s);
    QFormerConfig qc = QFormerConfig::from_config(cfg);
    TrainConfig tc = TrainConfig::from_config(cfg);
    LoraSettings lora = LoraSettings::from_config(cfg);
    JointLossOptions jopts = JointLossOptions::from_config(cfg);

    scope.arm(out_dir, argv, cfg.content_hash(), tc.seed);
    scope.manifest.scale_note = scale_note(tc);

    SyntheticCorpus corpus = corpus_from_config(cfg, qc, tc.seed);
    Model model = Model::build(qc, profile, tc.seed, lora);

    StageOptions opts;
    opts.out_dir = out_dir;
    if (!resume.empty()) opts.resume = resume;
    opts.lora_in_multitask = lora.enable_multitask;
    opts.weights = jopts.weights;
    if (cfg.has("objectives", "negatives")) {
        opts.negatives = jopts.negatives;
    } else {
        // profile defaults: uniform negatives for Base, mined for Chat
        opts.negatives =
            profile == Profile::BASE ? NegativeMode::Uniform : NegativeMode::HardArgmax;
    }

    StageReport report = run_stage(model, stage, profile, corpus, tc, opts);

    scope.manifest.artifacts = {report.checkpoint.string(), report.trace_csv.string()};
    scope.manifest.final_metrics = {
        {"stage", stage_name(stage)},
        {"profile", profile_name(profile)},
        {"steps", report.steps_run},
        {"final_loss", report.final_loss},
        {"final_itg", report.final_itg},
        {"r_at_1", report.final_r_at_1},
    };
    std::cout << fmt::format(
        "stage {} ({}) done: steps={} final_loss={:.4f} itg={:.4f} r@1={:.3f}\n",
        stage_name(stage), profile_name(profile), report.steps_run, report.final_loss,
        report.final_itg, report.final_r_at_1);
    std::cout << "checkpoint: " << report.checkpoint.string() << "\n";
    return 0;
}

int cmd_datagen(const std::vector<std::string>& argv, const std::string& config_path,
                const std::string& kind_s, const std::string& rewrite_s, const std::string& in,
                const std::string& out_dir, const std::string& client_s, double threshold,
                long seed_flag, int count, int parallelism, ManifestScope& scope) {
    IniConfig cfg = load_config(config_path);
    uint64_t seed = seed_flag >= 0 ? static_cast<uint64_t>(seed_flag)
                                   : static_cast<uint64_t>(cfg.get_int("datagen", "seed", 0));
    scope.arm(out_dir, argv, cfg.content_hash(), seed);

    datagen::TemplateSet templates = datagen::TemplateSet::load(
        cfg.has("datagen", "templates_dir")
            ? std::filesystem::path(cfg.get_str("datagen", "templates_dir", ""))
            : datagen::TemplateSet::default_dir());
    auto client = datagen::make_client(client_s, cfg);
    datagen::FilterRules rules = datagen::FilterRules::from_config(cfg);

    auto images = datagen::load_symbolic_images(in);
    auto pool = datagen::load_exemplars(
        cfg.has("datagen", "exemplars")
            ? std::filesystem::path(cfg.get_str("datagen", "exemplars", ""))
            : datagen::default_exemplar_path());

    // Similarity-based cleaning of the incoming caption records.
    auto scorer = datagen::make_scorer(cfg.get_str("datagen", "scorer", "hash"));
    std::vector<datagen::CleanRecord> records;
    for (const auto& img : images)
        for (const auto& cap : img.captions) records.push_back({img.image_id, cap});
    datagen::CleanResult cleaned = datagen::clean_corpus(records, *scorer, threshold);
    std::set<std::string> kept_ids;
    for (const auto& r : cleaned.kept) kept_ids.insert(r.image_id);

    datagen::JobKind kind = datagen::parse_kind(kind_s);
    std::optional<datagen::RewriteScheme> rewrite;
    if (!rewrite_s.empty()) rewrite = datagen::parse_rewrite(rewrite_s);
    std::string target_lang = cfg.get_str("datagen", "target_language", "en");
    int exemplars_per_job = static_cast<int>(cfg.get_int("datagen", "exemplars_per_job", 2));

    Rng rng(mix_seed(seed, 0x6a6f6273ull));
    std::vector<datagen::GenerationJob> jobs;
    uint64_t job_id = 0;
    for (const auto& img : images) {
        if (!kept_ids.count(img.image_id)) continue;
        if (count > 0 && static_cast<int>(jobs.size()) >= count) break;
        datagen::GenerationJob job;
        job.id = job_id++;
        job.kind = kind;
        job.rewrite = rewrite;
        job.exemplars = datagen::pick_exemplars(pool, exemplars_per_job, rng);
        job.query = img;
        job.target_language = target_lang;
        jobs.push_back(std::move(job));
    }
    require(!jobs.empty(), "no jobs to run: input {} yielded nothing after cleaning", in);

    datagen::PipelineOptions popts;
    popts.out_dir = out_dir;
    popts.seed = seed;
    popts.parallelism = parallelism;
    popts.max_retries = static_cast<int>(cfg.get_int("datagen", "max_retries", 2));
    datagen::PipelineResult result =
        datagen::generate_pairs(jobs, *client, rules, templates, popts);

    // Extend the summary with the cleaning report.
    ordered_json summary = ordered_json::parse(std::ifstream(result.summary_path),
                                               nullptr, true);
    summary["clean_records"] = records.size();
    summary["clean_kept"] = cleaned.kept.size();
    summary["retention_pct"] = cleaned.retention_pct;
    eval::write_json(result.summary_path, summary);

    scope.manifest.artifacts = {result.pairs_path.string(), result.rejects_path.string(),
                                result.summary_path.string()};
    scope.manifest.final_metrics = {
        {"jobs", result.jobs},          {"passed", result.passed},
        {"rejected", result.rejected},  {"failed", result.failed},
        {"pairs", result.pairs_written}, {"retention_pct", cleaned.retention_pct},
    };
    std::cout << fmt::format("datagen done: jobs={} passed={} rejected={} failed={} pairs={}\n",
                             result.jobs, result.passed, result.rejected, result.failed,
                             result.pairs_written);
    std::cout << fmt::format("cleaning retention: {:.1f}%\n", cleaned.retention_pct);
    return 0;
}

int cmd_eval(const std::vector<std::string>& argv, const std::string& config_path,
             const std::string& metric, const std::string& in, const std::string& refs,
             const std::string& out, const std::string& judge_s, int k, const std::string& ckpt,
             long seed_flag, int batch, ManifestScope& scope) {
    IniConfig cfg = load_config(config_path);
    uint64_t seed = seed_flag >= 0 ? static_cast<uint64_t>(seed_flag) : 0;
    std::filesystem::path out_dir =
        out.empty() ? std::filesystem::path(".") : std::filesystem::path(out).parent_path();
    if (out_dir.empty()) out_dir = ".";
    scope.arm(out_dir, argv, cfg.content_hash(), seed);

    ordered_json report;
    std::string table;

    if (metric == "cider") {
        require(!in.empty() && !refs.empty(), "cider needs --in candidates and --refs references");
        std::map<std::string, std::vector<std::string>> ref_map;
        for (const auto& j : read_jsonl(refs))
            ref_map[j.at("image_id").get<std::string>()] =
                j.at("captions").get<std::vector<std::string>>();
        eval::CaptionCorpus corpus;
        for (const auto& j : read_jsonl(in)) {
            eval::CaptionCorpus::Item item;
            item.image_id = j.at("image_id").get<std::string>();
            item.candidate = j.at("caption").get<std::string>();
            auto it = ref_map.find(item.image_id);
            require(it != ref_map.end(), "no references for image {}", item.image_id);
            item.references = it->second;
            corpus.items.push_back(std::move(item));
        }
        eval::CiderResult res = eval::cider(corpus);
        std::vector<std::vector<std::string>> rows;
        for (size_t i = 0; i < corpus.items.size(); ++i)
            rows.push_back({corpus.items[i].image_id,
                            fmt::format("{:.4f}", res.per_image[i])});
        rows.push_back({"mean", fmt::format("{:.4f}", res.mean)});
        table = eval::render_table({"image", "cider"}, rows);
        report["metric"] = "cider";
        report["mean"] = res.mean;
        report["per_image"] = res.per_image;
    } else if (metric == "vqa" || metric == "em") {
        require(!in.empty() && !refs.empty(), "{} needs --in predictions and --refs ground truth",
                metric);
        std::map<std::string, ordered_json> gt;
        for (const auto& j : read_jsonl(refs)) gt[j.at("qid").get<std::string>()] = j;
        double total = 0.0;
        size_t n = 0;
        for (const auto& j : read_jsonl(in)) {
            std::string qid = j.at("qid").get<std::string>();
            auto it = gt.find(qid);
            require(it != gt.end(), "no ground truth for qid {}", qid);
            std::string answer = j.at("answer").get<std::string>();
            if (metric == "vqa") {
                eval::VQARecord rec;
                rec.answers = it->second.at("answers").get<std::vector<std::string>>();
                rec.prediction = answer;
                total += eval::vqa_score(rec);
            } else {
                total += eval::exact_match(answer, it->second.at("answer").get<std::string>());
            }
            ++n;
        }
        require(n > 0, "no predictions in {}", in);
        double mean = total / static_cast<double>(n);
        table = eval::render_table({"metric", "value", "records"},
                                   {{metric, fmt::format("{:.4f}", mean), std::to_string(n)}});
        report["metric"] = metric;
        report["value"] = mean;
        report["records"] = n;
    } else if (metric == "retrieval") {
        eval::RetrievalResult res;
        int b = 0;
        if (!ckpt.empty()) {
            QFormerConfig qc = QFormerConfig::from_config(cfg);
            LoraSettings lora = LoraSettings::from_config(cfg);
            Profile profile = parse_profile(cfg.get_str("eval", "profile", "base"));
            Model model = Model::build(qc, profile, seed, lora);
            auto params = model.parameters();
            load_checkpoint(ckpt, params);
            SyntheticCorpus corpus = corpus_from_config(cfg, qc, seed);
            b = batch > 0 ? batch : std::min(16, corpus.num_concepts);
            Rng rng(mix_seed(seed, 0x6576616cull));
            Batch eval_batch = corpus.make_batch(b, rng);
            Tape t;
            SimilarityMatrix sim = itc_similarity_matrix(model, t, eval_batch);
            res = eval::retrieval_at_k(sim.s, k);
        } else {
            require(!in.empty(), "retrieval needs --ckpt or --in with a similarity matrix");
            ordered_json j = ordered_json::parse(std::ifstream(in), nullptr, true);
            auto sim = j.at("sim").get<std::vector<std::vector<double>>>();
            b = static_cast<int>(sim.size());
            res = eval::retrieval_at_k(sim, k);
        }
        table = eval::render_table(
            {"k", "IR@k", "TR@k", "batch"},
            {{std::to_string(k), fmt::format("{:.4f}", res.ir_at_k),
              fmt::format("{:.4f}", res.tr_at_k), std::to_string(b)}});
        report["metric"] = "retrieval";
        report["k"] = k;
        report["ir_at_k"] = res.ir_at_k;
        report["tr_at_k"] = res.tr_at_k;
        report["batch"] = b;
    } else if (metric == "judged") {
        require(!in.empty() && !refs.empty(),
                "judged needs --in candidates and --refs instances");
        std::vector<eval::JudgedInstance> instances;
        for (const auto& j : read_jsonl(refs)) {
            eval::JudgedInstance inst;
            inst.id = j.at("id").get<std::string>();
            inst.category = j.at("category").get<std::string>();
            inst.context = j.value("context", "");
            inst.question = j.value("question", "");
            inst.reference = j.at("reference").get<std::string>();
            instances.push_back(std::move(inst));
        }
        std::map<std::string, std::string> candidates;
        for (const auto& j : read_jsonl(in))
            candidates[j.at("id").get<std::string>()] = j.at("answer").get<std::string>();
        auto judge = eval::make_judge(judge_s);
        eval::JudgedReport rep = eval::judged_benchmark(instances, candidates, *judge);
        table = eval::render_table({"Con", "DD", "CR", "AVG", "scored", "unscored"},
                                   {{fmt::format("{:.1f}", rep.con), fmt::format("{:.1f}", rep.dd),
                                     fmt::format("{:.1f}", rep.cr), fmt::format("{:.1f}", rep.avg),
                                     std::to_string(rep.scored), std::to_string(rep.unscored)}});
        if (rep.unscored > 0)
            table += fmt::format("warning: {} instances had no candidate and were excluded\n",
                                 rep.unscored);
        report["metric"] = "judged";
        report["judge"] = judge->name();
        report["con"] = rep.con;
        report["dd"] = rep.dd;
        report["cr"] = rep.cr;
        report["avg"] = rep.avg;
        report["scored"] = rep.scored;
        report["unscored"] = rep.unscored;
    } else {
        fail("unknown metric '{}', expected cider, vqa, em, retrieval or judged", metric);
    }

    std::cout << table;
    if (!out.empty()) {
        eval::write_json(out, report);
        scope.manifest.artifacts = {out};
    }
    scope.manifest.final_metrics = report;
    return 0;
}

int cmd_inspect(const std::vector<std::string>& argv, const std::string& ckpt,
                ManifestScope& scope) {
    scope.arm(".", argv, 0, 0);
    auto manifest = read_manifest(ckpt);
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : manifest) {
        rows.push_back({e.name, shape_str(e.shape), std::to_string(e.offset)});
    }
    std::cout << eval::render_table({"name", "shape", "offset"}, rows);
    std::cout << fmt::format("{} parameters\n", manifest.size());
    scope.manifest.final_metrics = {{"parameters", manifest.size()}};
    scope.manifest.artifacts = {ckpt};
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"desk-scale bilingual vision-language training stack"};
    app.require_subcommand(1);

    std::string config_path, stage_s = "pretrain", profile_s = "base", resume, out_dir = "runs";
    long seed_flag = -1;

    auto* train = app.add_subcommand("train", "run one training stage");
    train->add_option("--config", config_path, "config file (ini)");
    train->add_option("--stage", stage_s, "pretrain | multitask | scene")->required();
    train->add_option("--profile", profile_s, "base | chat");
    train->add_option("--resume", resume, "checkpoint of the previous stage");
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--seed", seed_flag, "override [train] seed");

    std::string dg_kind = "conversation", dg_rewrite, dg_in, dg_out = "datagen_out",
                dg_client = "mock";
    double dg_threshold = -1.0;
    int dg_count = 0, dg_parallelism = 1;
    auto* dg = app.add_subcommand("datagen", "construct instruction-response pairs");
    dg->add_option("--config", config_path, "config file (ini)");
    dg->add_option("--kind", dg_kind,
                   "conversation | detail_description | complex_reasoning | translation");
    dg->add_option("--rewrite", dg_rewrite,
                   "deepening | concretizing | increasing_reasoning | adding_constraints");
    dg->add_option("--in", dg_in, "symbolic images (jsonl)")->required();
    dg->add_option("--out", dg_out, "output directory");
    dg->add_option("--client", dg_client, "mock | mock-prose | http");
    dg->add_option("--threshold", dg_threshold, "similarity cleaning threshold");
    dg->add_option("--seed", seed_flag, "pipeline seed");
    dg->add_option("--count", dg_count, "cap the number of jobs (0 = all)");
    dg->add_option("--parallelism", dg_parallelism, "worker threads");

    std::string ev_metric, ev_in, ev_refs, ev_out, ev_judge = "mock-overlap", ev_ckpt;
    int ev_k = 1, ev_batch = 0;
    auto* ev = app.add_subcommand("eval", "run a metric");
    ev->add_option("--config", config_path, "config file (ini)");
    ev->add_option("--metric", ev_metric, "cider | vqa | em | retrieval | judged")->required();
    ev->add_option("--in", ev_in, "predictions / candidates / similarity json");
    ev->add_option("--refs", ev_refs, "references / ground truth / instances");
    ev->add_option("--out", ev_out, "write the report json here");
    ev->add_option("--judge", ev_judge, "judged metric scorer");
    ev->add_option("--k", ev_k, "retrieval rank");
    ev->add_option("--ckpt", ev_ckpt, "score in-batch retrieval from a checkpoint");
    ev->add_option("--seed", seed_flag, "evaluation seed");
    ev->add_option("--batch", ev_batch, "retrieval batch size");

    std::string ins_ckpt;
    auto* ins = app.add_subcommand("inspect", "print a checkpoint manifest");
    ins->add_option("ckpt", ins_ckpt, "checkpoint path")->required();

    std::vector<std::string> argv_copy = args;
    // CLI11 parses reversed argv without the program name.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    ManifestScope scope;
    try {
        int rc = 1;
        if (train->parsed()) {
            rc = cmd_train(argv_copy, config_path, stage_s, profile_s, resume, out_dir, seed_flag,
                           scope);
        } else if (dg->parsed()) {
            rc = cmd_datagen(argv_copy, config_path, dg_kind, dg_rewrite, dg_in, dg_out, dg_client,
                             dg_threshold, seed_flag, dg_count, dg_parallelism, scope);
        } else if (ev->parsed()) {
            rc = cmd_eval(argv_copy, config_path, ev_metric, ev_in, ev_refs, ev_out, ev_judge,
                          ev_k, ev_ckpt, seed_flag, ev_batch, scope);
        } else if (ins->parsed()) {
            rc = cmd_inspect(argv_copy, ins_ckpt, scope);
        }
        scope.finish(rc);
        return rc;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        scope.finish(1);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        scope.finish(2);
        return 2;
    }
}

}  // namespace zv
