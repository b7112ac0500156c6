#include "zv/trainer.hpp"

#include <cmath>
#include <fstream>

#include "zv/checkpoint.hpp"
#include "zv/evalkit/retrieval.hpp"

namespace zv {

Tensor decoder_batch_loss(const Model& model, Tape& t, const std::vector<Tensor>& images,
                          const std::vector<FormattedExample>& examples, bool instruction_aware) {
    require(!examples.empty() && images.size() == examples.size(),
            "decoder_batch_loss: {} images for {} examples", images.size(), examples.size());
    std::vector<Tensor> logit_blocks;
    std::vector<int> targets;
    for (size_t i = 0; i < examples.size(); ++i) {
        const FormattedExample& ex = examples[i];
        require(ex.tokens.size() >= 2, "formatted example {} is too short", i);
        std::vector<int> instr = ex.instruction_tokens();
        Tensor prefix = model.extract_visual_prefix(t, images[i],
                                                    instruction_aware ? &instr : nullptr);
        Tensor logits = model.decode(t, prefix, ex.tokens);
        logit_blocks.push_back(logits);
        for (size_t p = 0; p < ex.tokens.size(); ++p) {
            if (p + 1 >= ex.tokens.size()) {
                targets.push_back(-1);  // last position predicts nothing
                continue;
            }
            int next = ex.tokens[p + 1];
            bool masked = ex.instruction_mask[p + 1] != 0 || next == kPad;
            targets.push_back(masked ? -1 : next);
        }
    }
    return cross_entropy(concat_rows(logit_blocks), targets, -1);
}

TraceRow eval_probe(const Model& model, const SyntheticCorpus& corpus, int batch_size,
                    uint64_t seed, NegativeMode negatives) {
    Rng rng(mix_seed(seed, 0x6576616cull));
    Batch batch = corpus.make_batch(batch_size, rng);
    Tape t;
    JointLossOptions opts;
    opts.negatives = negatives;
    JointLoss jl = joint_loss(model, t, batch, opts, rng);
    TraceRow row;
    row.itc = jl.itc_value();
    row.itg = jl.itg_value();
    row.itm = jl.itm_value();

    Tape ts;
    SimilarityMatrix sim = itc_similarity_matrix(model, ts, batch);
    row.r_at_1 = eval::retrieval_at_k(sim.s, 1).mean();
    return row;
}

namespace {

std::vector<FormattedExample> sample_multitask_examples(const SyntheticCorpus& corpus,
                                                        int batch_size, Rng& rng,
                                                        std::vector<Tensor>& images) {
    std::vector<FormattedExample> out;
    for (int i = 0; i < batch_size; ++i) {
        int concept_id = rng.uniform_int(corpus.num_concepts);
        auto task = static_cast<TaskKind>(rng.uniform_int(4));
        Lang lang = rng.uniform() < 0.5 ? Lang::En : Lang::Zh;
        if (!corpus.tokens.has_coords &&
            (task == TaskKind::Grounding || task == TaskKind::GroundedCaption)) {
            task = TaskKind::Captioning;  // grounding needs coordinate tokens
        }
        MultitaskRecord rec = make_multitask_record(corpus, task, concept_id, lang);
        out.push_back(format_multitask_example(task, rec, corpus.tokens));
        images.push_back(corpus.sample_image(concept_id, rng));
    }
    return out;
}

std::vector<FormattedExample> sample_dialogue_examples(const SyntheticCorpus& corpus,
                                                       int batch_size, int turns, Rng& rng,
                                                       std::vector<Tensor>& images) {
    std::vector<FormattedExample> out;
    for (int i = 0; i < batch_size; ++i) {
        int concept_id = rng.uniform_int(corpus.num_concepts);
        out.push_back(make_dialogue_example(corpus, concept_id, turns, rng));
        images.push_back(corpus.sample_image(concept_id, rng));
    }
    return out;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail_runtime("cannot write trace: {}", path.string());
        out << "step,itc,itg,itm,r_at_1\n";
        for (const TraceRow& r : trace)
            out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.step, r.itc, r.itg, r.itm,
                               r.r_at_1);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

StageReport run_stage(Model& model, Stage stage, Profile profile, const SyntheticCorpus& corpus,
                      const TrainConfig& cfg, const StageOptions& opts) {
    cfg.validate();
    require(model.profile == profile, "model was built for profile {}, stage asked for {}",
            profile_name(model.profile), profile_name(profile));
    require(corpus.image_patches == model.cfg.image_patches &&
                corpus.image_feat_dim == model.cfg.image_feat_dim,
            "corpus grid {}x{} does not match the model's {}x{}", corpus.image_patches,
            corpus.image_feat_dim, model.cfg.image_patches, model.cfg.image_feat_dim);
    std::filesystem::create_directories(opts.out_dir);

    auto params = model.parameters();
    if (stage != Stage::PRETRAIN) {
        require(opts.resume.has_value(),
                "stage {} requires the previous stage's checkpoint (--resume)",
                stage_name(stage));
        load_checkpoint(*opts.resume, params);
    }
    apply_trainable(model, resolve_trainable(stage, profile, opts.lora_in_multitask));

    StageReport report;
    report.stage = stage;
    report.profile = profile;

    Rng data_rng(mix_seed(cfg.seed, 0x64617461ull + static_cast<uint64_t>(stage)));
    Rng neg_rng(mix_seed(cfg.seed, 0x6e656761ull + static_cast<uint64_t>(stage)));
    OptimizerState opt_state;
    std::vector<double> train_losses;

    JointLossOptions joint_opts;
    joint_opts.negatives = opts.negatives;
    joint_opts.weights = opts.weights;

    TraceRow initial = eval_probe(model, corpus, std::min(cfg.batch_size, corpus.num_concepts),
                                  cfg.seed, opts.negatives);
    report.initial_itg = initial.itg;

    for (int step = 0; step < cfg.max_steps; ++step) {
        if (step % cfg.eval_interval == 0) {
            TraceRow row = eval_probe(model, corpus,
                                      std::min(cfg.batch_size, corpus.num_concepts), cfg.seed,
                                      opts.negatives);
            row.step = step;
            report.trace.push_back(row);
        }

        Tape t;
        Tensor loss;
        switch (stage) {
            case Stage::PRETRAIN: {
                Batch batch = corpus.make_batch(cfg.batch_size, data_rng);
                loss = joint_loss(model, t, batch, joint_opts, neg_rng).total;
                break;
            }
            case Stage::MULTITASK: {
                std::vector<Tensor> images;
                auto examples =
                    sample_multitask_examples(corpus, cfg.batch_size, data_rng, images);
                loss = decoder_batch_loss(model, t, images, examples,
                                          profile == Profile::CHAT);
                break;
            }
            case Stage::SCENE_AWARE: {
                std::vector<Tensor> images;
                auto examples = sample_dialogue_examples(corpus, cfg.batch_size,
                                                         opts.dialogue_turns, data_rng, images);
                loss = decoder_batch_loss(model, t, images, examples,
                                          profile == Profile::CHAT);
                break;
            }
        }
        double lv = loss.at(0);
        if (!std::isfinite(lv))
            fail_runtime("stage {} step {}: non-finite loss {}", stage_name(stage), step, lv);
        train_losses.push_back(lv);

        zero_gradients(params);
        t.backward(loss);
        clip_gradients(params, cfg.grad_clip);
        adamw_step(params, opt_state, cfg);
        model.clamp_temperature();
    }

    TraceRow last = eval_probe(model, corpus, std::min(cfg.batch_size, corpus.num_concepts),
                               cfg.seed, opts.negatives);
    last.step = cfg.max_steps;
    report.trace.push_back(last);
    report.final_itg = last.itg;
    report.final_r_at_1 = last.r_at_1;
    report.steps_run = cfg.max_steps;

    if (!train_losses.empty()) {
        report.initial_loss = train_losses.front();
        report.final_loss = train_losses.back();
        size_t frac = std::max<size_t>(1, train_losses.size() / 10);
        double head = 0.0, tail = 0.0;
        for (size_t i = 0; i < frac; ++i) head += train_losses[i];
        for (size_t i = train_losses.size() - frac; i < train_losses.size(); ++i)
            tail += train_losses[i];
        report.first_frac_mean = head / static_cast<double>(frac);
        report.last_frac_mean = tail / static_cast<double>(frac);
    }

    std::string base = fmt::format("{}_{}", stage_name(stage), profile_name(profile));
    report.checkpoint = opts.out_dir / (base + ".zvc");
    report.trace_csv = opts.out_dir / (base + "_trace.csv");
    save_checkpoint(report.checkpoint, params);
    write_trace_csv(report.trace_csv, report.trace);
    return report;
}

}  // namespace zv
