#include "zv/datagen/clean.hpp"

#include <cmath>

namespace zv::datagen {

double HashScorer::score(const std::string& caption, const std::string& image_id) {
    uint64_t h = fnv1a64(caption);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(image_id, h);
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
    return 2.0 * u - 1.0;
}

double KeywordScorer::score(const std::string& caption, const std::string&) {
    return caption.find(keyword_) != std::string::npos ? hi_ : lo_;
}

CleanResult clean_corpus(const std::vector<CleanRecord>& records, SimilarityScorer& scorer,
                         double threshold) {
    CleanResult res;
    for (const auto& r : records) {
        if (scorer.score(r.caption, r.image_id) >= threshold) {
            res.kept.push_back(r);
        } else {
            res.dropped.push_back(r);
        }
    }
    if (!records.empty()) {
        double pct = 100.0 * static_cast<double>(res.kept.size()) / records.size();
        res.retention_pct = std::round(pct * 10.0) / 10.0;
    }
    return res;
}

std::unique_ptr<SimilarityScorer> make_scorer(const std::string& spec) {
    if (spec == "hash") return std::make_unique<HashScorer>();
    if (spec.rfind("keyword:", 0) == 0)
        return std::make_unique<KeywordScorer>(spec.substr(8));
    fail("unknown scorer '{}', expected hash or keyword:<word>", spec);
}

}  // namespace zv::datagen
