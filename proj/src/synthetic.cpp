#include "zv/synthetic.hpp"

#include <cmath>

namespace zv {

SyntheticCorpus SyntheticCorpus::make(int num_concepts, int image_patches, int image_feat_dim,
                                      int vocab_size, uint64_t seed, double noise_sigma,
                                      double margin) {
    require(num_concepts >= 1, "corpus needs at least one concept");
    require(image_patches >= 1 && image_feat_dim >= 1, "corpus image extents must be positive");
    SyntheticCorpus c;
    c.num_concepts = num_concepts;
    c.image_patches = image_patches;
    c.image_feat_dim = image_feat_dim;
    c.noise_sigma = noise_sigma;
    c.margin = margin;
    c.seed = seed;
    c.tokens = TokenMap(vocab_size);

    // Task markers occupy the first word indices; concept content starts
    // above them so instruction prefixes stay distinguishable.
    const int content_offset = 4;
    Rng root(mix_seed(seed, 0x636f7270ull));
    size_t grid = static_cast<size_t>(image_patches) * image_feat_dim;
    for (int k = 0; k < num_concepts; ++k) {
        Rng rng = root.fork(static_cast<uint64_t>(k));
        Concept item;
        item.centroid.resize(grid);
        for (auto& v : item.centroid) v = rng.gaussianf(1.0);

        auto make_caption = [&](Lang lang) {
            std::vector<int> cap;
            int len = 4 + rng.uniform_int(3);
            // Lead with a concept-identifying word, then filler.
            cap.push_back(c.tokens.word(lang, content_offset + k));
            for (int i = 1; i < len; ++i)
                cap.push_back(c.tokens.word(
                    lang, content_offset + rng.uniform_int(64)));
            cap.push_back(kEos);
            return cap;
        };
        item.caption_en = make_caption(Lang::En);
        item.caption_zh = make_caption(Lang::Zh);
        item.answer_token = item.caption_en.front();
        item.tag = {c.tokens.word(Lang::En, content_offset + k),
                       c.tokens.word(Lang::En, content_offset + rng.uniform_int(64))};
        item.question = {c.tokens.word(Lang::En, 0), item.tag[0], item.tag[1]};

        double x1 = rng.uniform(0.0, 0.55);
        double y1 = rng.uniform(0.0, 0.55);
        item.box = {x1, y1, x1 + rng.uniform(0.1, 0.4), y1 + rng.uniform(0.1, 0.4)};
        c.concepts.push_back(std::move(item));
    }

    double min_dist = c.min_centroid_distance();
    require(num_concepts < 2 || min_dist >= margin,
            "corpus seed {} yields centroid distance {:.3f} below the declared margin {:.3f}; "
            "increase image extents or pick another seed",
            seed, min_dist, margin);
    return c;
}

Tensor SyntheticCorpus::sample_image(int concept_id, Rng& rng) const {
    require(concept_id >= 0 && concept_id < num_concepts, "concept {} outside [0, {})", concept_id,
            num_concepts);
    const auto& base = concepts[static_cast<size_t>(concept_id)].centroid;
    std::vector<float> vals(base.size());
    for (size_t i = 0; i < base.size(); ++i)
        vals[i] = base[i] + rng.gaussianf(noise_sigma);
    return Tensor({image_patches, image_feat_dim}, std::move(vals));
}

const std::vector<int>& SyntheticCorpus::caption(int concept_id, Lang lang) const {
    const Concept& c = concepts[static_cast<size_t>(concept_id)];
    return lang == Lang::En ? c.caption_en : c.caption_zh;
}

Batch SyntheticCorpus::make_batch(int batch_size, Rng& rng) const {
    require(batch_size >= 1, "batch_size must be >= 1");
    std::vector<int> order(static_cast<size_t>(num_concepts));
    for (int i = 0; i < num_concepts; ++i) order[static_cast<size_t>(i)] = i;
    Batch batch;
    for (int b = 0; b < batch_size; ++b) {
        int concept_id;
        if (batch_size <= num_concepts) {
            int j = b + rng.uniform_int(num_concepts - b);
            std::swap(order[static_cast<size_t>(b)], order[static_cast<size_t>(j)]);
            concept_id = order[static_cast<size_t>(b)];
        } else {
            concept_id = rng.uniform_int(num_concepts);
        }
        batch.images.push_back(sample_image(concept_id, rng));
        Lang lang = rng.uniform() < 0.5 ? Lang::En : Lang::Zh;
        batch.captions.push_back(caption(concept_id, lang));
    }
    return batch;
}

double SyntheticCorpus::min_centroid_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < concepts.size(); ++i) {
        for (size_t j = i + 1; j < concepts.size(); ++j) {
            double acc = 0.0;
            for (size_t k = 0; k < concepts[i].centroid.size(); ++k) {
                double d = static_cast<double>(concepts[i].centroid[k]) - concepts[j].centroid[k];
                acc += d * d;
            }
            best = std::min(best, std::sqrt(acc));
        }
    }
    return best;
}

}  // namespace zv
