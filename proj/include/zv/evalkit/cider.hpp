#pragma once

#include <string>
#include <vector>

namespace zv::eval {

struct CaptionCorpus {
    struct Item {
        std::string image_id;
        std::vector<std::string> references;
        std::string candidate;
    };
    std::vector<Item> items;
    int ngram_order = 4;
};

struct CiderResult {
    std::vector<double> per_image;
    double mean = 0.0;
};

// TF-IDF n-gram cosine similarity against the references, averaged over
// n = 1..N and scaled by 10. IDF needs at least two images.
CiderResult cider(const CaptionCorpus& corpus);

}  // namespace zv::eval
