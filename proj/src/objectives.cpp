#include "zv/objectives.hpp"

#include <cmath>

#include "zv/tokens.hpp"

namespace zv {

void Batch::validate() const {
    require(!images.empty(), "batch must contain at least one pair");
    require(images.size() == captions.size(), "batch has {} images but {} captions",
            images.size(), captions.size());
    for (size_t i = 0; i < captions.size(); ++i) {
        require(!captions[i].empty(), "caption {} is empty", i);
        require(captions[i].back() == kEos, "caption {} does not end with eos", i);
    }
}

double itc_similarity(const Tensor& query_states, const Tensor& text_embedding) {
    int q = query_states.rows(), h = query_states.cols();
    require(static_cast<int>(text_embedding.size()) == h,
            "itc_similarity: text embedding {} does not match query width {}",
            shape_str(text_embedding.shape()), h);
    double tnorm = 0.0;
    for (int j = 0; j < h; ++j)
        tnorm += static_cast<double>(text_embedding.at(j)) * text_embedding.at(j);
    require(tnorm > 0.0, "itc_similarity: text embedding has zero norm");
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < q; ++i) {
        double dot = 0.0, qnorm = 0.0;
        for (int j = 0; j < h; ++j) {
            dot += static_cast<double>(query_states.at(i, j)) * text_embedding.at(j);
            qnorm += static_cast<double>(query_states.at(i, j)) * query_states.at(i, j);
        }
        require(qnorm > 0.0, "itc_similarity: query row {} has zero norm", i);
        best = std::max(best, dot);
    }
    return best;
}

Tensor itc_loss(const SimilarityMatrix& sim) {
    int b = sim.s.rows();
    require(sim.s.cols() == b, "itc_loss: similarity matrix {} is not square",
            shape_str(sim.s.shape()));
    std::vector<int> diag(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) diag[static_cast<size_t>(i)] = i;
    Tensor scaled = div_by_scalar(sim.s, sim.temperature);
    Tensor i2t = cross_entropy(scaled, diag, /*ignore_index=*/-1);
    Tensor t2i = cross_entropy(transpose(scaled), diag, /*ignore_index=*/-1);
    return scale(add(i2t, t2i), 0.5f);
}

namespace {

std::vector<int> with_bos(const std::vector<int>& caption) {
    std::vector<int> out;
    out.reserve(caption.size() + 1);
    out.push_back(kBos);
    out.insert(out.end(), caption.begin(), caption.end());
    return out;
}

}  // namespace

SimilarityMatrix itc_similarity_matrix(const Model& model, Tape& t, const Batch& batch) {
    batch.validate();
    int b = batch.size();
    std::vector<Tensor> query_norm;   // [Q x h] per image
    std::vector<Tensor> text_rows;    // [1 x h] per caption
    query_norm.reserve(static_cast<size_t>(b));
    text_rows.reserve(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        std::vector<int> text = with_bos(batch.captions[static_cast<size_t>(i)]);
        QFormerOutput out = model.forward(t, batch.images[static_cast<size_t>(i)], &text,
                                          MaskMode::ITC);
        query_norm.push_back(l2_normalize_rows(out.query_states));
        // First text position doubles as the sequence embedding.
        text_rows.push_back(l2_normalize_rows(slice_rows(out.text_states, 0, 1)));
    }
    Tensor text_matrix = concat_rows(text_rows);  // [B x h]
    std::vector<Tensor> sim_rows;
    sim_rows.reserve(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        Tensor per_query = matmul(query_norm[static_cast<size_t>(i)], transpose(text_matrix));
        sim_rows.push_back(max_over_rows(per_query));  // [1 x B]
    }
    SimilarityMatrix sim;
    sim.s = concat_rows(sim_rows);
    sim.temperature = model.temperature.on(t);
    return sim;
}

int sample_hard_negative(const SimilarityMatrix& sim, int row, bool deterministic, Rng& rng) {
    int b = sim.batch();
    require(b >= 2, "sample_hard_negative: batch of {} has no negative candidates", b);
    require(row >= 0 && row < b, "sample_hard_negative: row {} outside batch {}", row, b);
    if (deterministic) {
        int best = -1;
        float bv = -std::numeric_limits<float>::infinity();
        for (int j = 0; j < b; ++j) {
            if (j == row) continue;
            if (sim.s.at(row, j) > bv) {
                bv = sim.s.at(row, j);
                best = j;
            }
        }
        return best;
    }
    double tau = sim.tau();
    require(tau > 0.0, "sample_hard_negative: temperature must be positive, got {}", tau);
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < b; ++j)
        if (j != row) mx = std::max(mx, static_cast<double>(sim.s.at(row, j)) / tau);
    std::vector<double> w(static_cast<size_t>(b), 0.0);
    double total = 0.0;
    for (int j = 0; j < b; ++j) {
        if (j == row) continue;
        w[static_cast<size_t>(j)] = std::exp(static_cast<double>(sim.s.at(row, j)) / tau - mx);
        total += w[static_cast<size_t>(j)];
    }
    double u = rng.uniform() * total;
    double acc = 0.0;
    int last = -1;
    for (int j = 0; j < b; ++j) {
        if (j == row) continue;
        acc += w[static_cast<size_t>(j)];
        last = j;
        if (u < acc) return j;
    }
    return last;
}

int sample_uniform_negative(int batch, int row, Rng& rng) {
    require(batch >= 2, "sample_uniform_negative: batch of {} has no negative candidates", batch);
    int j = rng.uniform_int(batch - 1);
    return j >= row ? j + 1 : j;
}

std::vector<int> sample_negatives(const SimilarityMatrix& sim, NegativeMode mode, Rng& rng) {
    int b = sim.batch();
    std::vector<int> out(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        switch (mode) {
            case NegativeMode::Uniform:
                out[static_cast<size_t>(i)] = sample_uniform_negative(b, i, rng);
                break;
            case NegativeMode::HardArgmax:
                out[static_cast<size_t>(i)] = sample_hard_negative(sim, i, true, rng);
                break;
            case NegativeMode::HardSoftmax:
                out[static_cast<size_t>(i)] = sample_hard_negative(sim, i, false, rng);
                break;
        }
    }
    return out;
}

Tensor itm_loss(const Model& model, Tape& t, const Batch& batch,
                const std::vector<int>& negatives) {
    batch.validate();
    int b = batch.size();
    require(static_cast<int>(negatives.size()) == b, "itm_loss: {} negatives for batch of {}",
            negatives.size(), b);
    std::vector<Tensor> logit_rows;
    std::vector<int> targets;
    logit_rows.reserve(static_cast<size_t>(2 * b));
    for (int i = 0; i < b; ++i) {
        require(negatives[static_cast<size_t>(i)] != i,
                "itm_loss: negative index {} equals the positive row", i);
        require(negatives[static_cast<size_t>(i)] >= 0 && negatives[static_cast<size_t>(i)] < b,
                "itm_loss: negative index {} outside batch {}", negatives[static_cast<size_t>(i)],
                b);
        std::vector<int> pos_text = with_bos(batch.captions[static_cast<size_t>(i)]);
        QFormerOutput pos = model.forward(t, batch.images[static_cast<size_t>(i)], &pos_text,
                                          MaskMode::ITM);
        logit_rows.push_back(model.itm_head.apply(t, mean_rows(pos.query_states)));
        targets.push_back(1);

        std::vector<int> neg_text =
            with_bos(batch.captions[static_cast<size_t>(negatives[static_cast<size_t>(i)])]);
        QFormerOutput neg = model.forward(t, batch.images[static_cast<size_t>(i)], &neg_text,
                                          MaskMode::ITM);
        logit_rows.push_back(model.itm_head.apply(t, mean_rows(neg.query_states)));
        targets.push_back(0);
    }
    return cross_entropy(concat_rows(logit_rows), targets, /*ignore_index=*/-1);
}

Tensor itg_loss(const Model& model, Tape& t, const Batch& batch) {
    batch.validate();
    std::vector<Tensor> logit_blocks;
    std::vector<int> targets;
    for (int i = 0; i < batch.size(); ++i) {
        const auto& caption = batch.captions[static_cast<size_t>(i)];
        std::vector<int> text = with_bos(caption);
        QFormerOutput out = model.forward(t, batch.images[static_cast<size_t>(i)], &text,
                                          MaskMode::ITG);
        logit_blocks.push_back(out.lm_logits);
        // Position t predicts text[t + 1]; the final position has no target.
        for (size_t p = 0; p < caption.size(); ++p) {
            int next = caption[p];
            targets.push_back(next == kPad ? -1 : next);
        }
        targets.push_back(-1);
    }
    Tensor logits = concat_rows(logit_blocks);
    return cross_entropy(logits, targets, /*ignore_index=*/-1);
}

JointLossOptions JointLossOptions::from_config(const IniConfig& cfg) {
    JointLossOptions o;
    std::string mode = cfg.get_str("objectives", "negatives", "hard_argmax");
    if (mode == "uniform") o.negatives = NegativeMode::Uniform;
    else if (mode == "hard_argmax") o.negatives = NegativeMode::HardArgmax;
    else if (mode == "hard_softmax") o.negatives = NegativeMode::HardSoftmax;
    else fail("config [objectives] negatives: unknown mode '{}'", mode);
    o.weights.itc = static_cast<float>(cfg.get_real("objectives", "w_itc", o.weights.itc));
    o.weights.itg = static_cast<float>(cfg.get_real("objectives", "w_itg", o.weights.itg));
    o.weights.itm = static_cast<float>(cfg.get_real("objectives", "w_itm", o.weights.itm));
    return o;
}

JointLoss joint_loss(const Model& model, Tape& t, const Batch& batch,
                     const JointLossOptions& opts, Rng& rng) {
    batch.validate();
    require(batch.size() >= 2, "joint_loss: batch of {} is too small (needs >= 2 for negatives)",
            batch.size());
    SimilarityMatrix sim = itc_similarity_matrix(model, t, batch);
    JointLoss loss;
    loss.itc = itc_loss(sim);
    std::vector<int> negatives = sample_negatives(sim, opts.negatives, rng);
    loss.itm = itm_loss(model, t, batch, negatives);
    loss.itg = itg_loss(model, t, batch);
    Tensor weighted = add(add(scale(loss.itc, opts.weights.itc), scale(loss.itg, opts.weights.itg)),
                          scale(loss.itm, opts.weights.itm));
    loss.total = weighted;
    return loss;
}

JointLoss joint_loss(const Model& model, Tape& t, const Batch& batch,
                     bool deterministic_negatives, Rng& rng) {
    JointLossOptions opts;
    opts.negatives =
        deterministic_negatives ? NegativeMode::HardArgmax : NegativeMode::HardSoftmax;
    return joint_loss(model, t, batch, opts, rng);
}

}  // namespace zv
