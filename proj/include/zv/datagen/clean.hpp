#pragma once

#include <memory>

#include "zv/datagen/types.hpp"

namespace zv::datagen {

// Caption-image similarity in [-1, 1]; deterministic per (caption, image_id).
class SimilarityScorer {
public:
    virtual ~SimilarityScorer() = default;
    virtual double score(const std::string& caption, const std::string& image_id) = 0;
    virtual std::string name() const = 0;
};

// Hash-uniform scorer: stable pseudo-random score per record.
class HashScorer : public SimilarityScorer {
public:
    double score(const std::string& caption, const std::string& image_id) override;
    std::string name() const override { return "hash"; }
};

// High score when the caption contains the keyword, low otherwise; used to
// craft corpora with exact retention ratios.
class KeywordScorer : public SimilarityScorer {
public:
    KeywordScorer(std::string keyword, double hi = 0.9, double lo = -0.5)
        : keyword_(std::move(keyword)), hi_(hi), lo_(lo) {}
    double score(const std::string& caption, const std::string& image_id) override;
    std::string name() const override { return "keyword:" + keyword_; }

private:
    std::string keyword_;
    double hi_, lo_;
};

struct CleanRecord {
    std::string image_id;
    std::string caption;
};

struct CleanResult {
    std::vector<CleanRecord> kept;
    std::vector<CleanRecord> dropped;
    double retention_pct = 0.0;  // one decimal
};

// Keeps records scoring >= threshold and reports retention to one decimal.
CleanResult clean_corpus(const std::vector<CleanRecord>& records, SimilarityScorer& scorer,
                         double threshold);

std::unique_ptr<SimilarityScorer> make_scorer(const std::string& spec);

}  // namespace zv::datagen
