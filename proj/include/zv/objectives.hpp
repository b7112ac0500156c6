#pragma once

#include <vector>

#include "zv/model.hpp"
#include "zv/rng.hpp"

namespace zv {

// Aligned image/caption pairs: captions[i] belongs to images[i]. Captions
// carry no leading bos (losses prepend it) and end with eos.
struct Batch {
    std::vector<Tensor> images;
    std::vector<std::vector<int>> captions;

    int size() const { return static_cast<int>(images.size()); }
    void validate() const;
};

// s[i][j] = similarity(image i, text j); diagonal entries are the positives.
struct SimilarityMatrix {
    Tensor s;            // [B x B], on tape when built for a loss
    Tensor temperature;  // single element, typically the learnable tau

    int batch() const { return s.rows(); }
    double tau() const { return temperature.at(0); }
};

struct JointLoss {
    Tensor itc, itg, itm;
    Tensor total;

    double itc_value() const { return itc.at(0); }
    double itg_value() const { return itg.at(0); }
    double itm_value() const { return itm.at(0); }
    double total_value() const { return total.at(0); }
};

enum class NegativeMode {
    Uniform,      // any j != i, equal weights (Base profile default)
    HardArgmax,   // deterministic: most similar non-matching text
    HardSoftmax,  // sampled proportionally to softmax(s/tau) over j != i
};

struct ObjectiveWeights {
    float itc = 1.0f, itg = 1.0f, itm = 1.0f;
};

// Image-text score: best match over the query vectors. Inputs must be
// L2-normalized; a zero-norm row cannot have been normalized and is an error.
double itc_similarity(const Tensor& query_states, const Tensor& text_embedding);

// Symmetric InfoNCE with diagonal targets over s / tau.
Tensor itc_loss(const SimilarityMatrix& sim);

// Query states and per-caption text embeddings from ITC-mode forwards,
// assembled into the differentiable similarity matrix.
SimilarityMatrix itc_similarity_matrix(const Model& model, Tape& t, const Batch& batch);

int sample_hard_negative(const SimilarityMatrix& sim, int row, bool deterministic, Rng& rng);
int sample_uniform_negative(int batch, int row, Rng& rng);
std::vector<int> sample_negatives(const SimilarityMatrix& sim, NegativeMode mode, Rng& rng);

// Binary cross-entropy of the 2-class head on mean-pooled ITM query states;
// one positive and one mined negative per row.
Tensor itm_loss(const Model& model, Tape& t, const Batch& batch,
                const std::vector<int>& negatives);

// Next-token cross-entropy under the ITG mask; pad positions are ignored.
Tensor itg_loss(const Model& model, Tape& t, const Batch& batch);

struct JointLossOptions {
    NegativeMode negatives = NegativeMode::HardArgmax;
    ObjectiveWeights weights;

    static JointLossOptions from_config(const IniConfig& cfg);
};

JointLoss joint_loss(const Model& model, Tape& t, const Batch& batch,
                     const JointLossOptions& opts, Rng& rng);
// deterministic_negatives selects argmax vs softmax-sampled hard negatives.
JointLoss joint_loss(const Model& model, Tape& t, const Batch& batch,
                     bool deterministic_negatives, Rng& rng);

}  // namespace zv
