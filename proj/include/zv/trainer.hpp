#pragma once

#include <filesystem>
#include <optional>

#include "zv/multitask.hpp"
#include "zv/optimizer.hpp"
#include "zv/trainable.hpp"

namespace zv {

struct StageOptions {
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> resume;  // required beyond pretrain
    NegativeMode negatives = NegativeMode::HardArgmax;
    ObjectiveWeights weights;
    bool lora_in_multitask = true;
    int dialogue_turns = 2;
};

struct TraceRow {
    int step = 0;
    double itc = 0.0, itg = 0.0, itm = 0.0;
    double r_at_1 = 0.0;
};

struct StageReport {
    Stage stage = Stage::PRETRAIN;
    Profile profile = Profile::BASE;
    int steps_run = 0;
    double initial_loss = 0.0, final_loss = 0.0;
    double initial_itg = 0.0, final_itg = 0.0;
    double first_frac_mean = 0.0, last_frac_mean = 0.0;  // first/last 10% of train loss
    double final_r_at_1 = 0.0;
    std::vector<TraceRow> trace;
    std::filesystem::path checkpoint;
    std::filesystem::path trace_csv;
};

// Pretrain optimizes the joint ITC/ITG/ITM objective on corpus batches; the
// multitask stage optimizes instruction-formatted decoder cross-entropy over
// the four task templates; the scene stage optimizes multi-turn dialogue
// cross-entropy. A checkpoint and a metric-trace CSV are written per stage.
StageReport run_stage(Model& model, Stage stage, Profile profile, const SyntheticCorpus& corpus,
                      const TrainConfig& cfg, const StageOptions& opts);

// Decoder cross-entropy over formatted examples; instruction positions and
// pads are loss-masked. Chat feeds the instruction span to the Q-Former.
Tensor decoder_batch_loss(const Model& model, Tape& t, const std::vector<Tensor>& images,
                          const std::vector<FormattedExample>& examples, bool instruction_aware);

// Deterministic evaluation probe on a seeded corpus batch: the three joint
// losses plus in-batch retrieval R@1 (mean of IR@1 and TR@1).
TraceRow eval_probe(const Model& model, const SyntheticCorpus& corpus, int batch_size,
                    uint64_t seed, NegativeMode negatives);

}  // namespace zv
