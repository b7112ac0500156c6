#pragma once

#include <array>

#include "zv/objectives.hpp"
#include "zv/tokens.hpp"

namespace zv {

// Seeded stand-in corpus: K well-separated concept feature grids, each with
// a deterministic caption in two disjoint token ranges (en/zh flavor), a
// tagged box and a question/answer pair for the instruction tasks.
struct SyntheticCorpus {
    struct Concept {
        std::vector<float> centroid;  // image_patches * image_feat_dim
        std::vector<int> caption_en;  // ends with eos, no bos
        std::vector<int> caption_zh;
        std::vector<int> tag;         // short en-range name
        std::vector<int> question;
        int answer_token = 0;
        std::array<double, 4> box{};  // x1 < x2, y1 < y2, in [0, 1]
    };

    int num_concepts = 0;
    int image_patches = 0;
    int image_feat_dim = 0;
    double noise_sigma = 0.05;
    double margin = 4.0;  // guaranteed minimum pairwise centroid distance
    uint64_t seed = 0;
    TokenMap tokens{16};
    std::vector<Concept> concepts;

    static SyntheticCorpus make(int num_concepts, int image_patches, int image_feat_dim,
                                int vocab_size, uint64_t seed, double noise_sigma = 0.05,
                                double margin = 4.0);

    Tensor sample_image(int concept_id, Rng& rng) const;
    const std::vector<int>& caption(int concept_id, Lang lang) const;

    // Concepts drawn without replacement while batch_size <= K; language
    // picked per item.
    Batch make_batch(int batch_size, Rng& rng) const;

    double min_centroid_distance() const;
};

}  // namespace zv
