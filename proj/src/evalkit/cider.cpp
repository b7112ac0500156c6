#include "zv/evalkit/cider.hpp"

#include <cmath>
#include <map>
#include <set>

#include "zv/common.hpp"
#include "zv/evalkit/normalize.hpp"

namespace zv::eval {

namespace {

// n-gram -> count, keyed per order; grams joined with an unprintable byte.
using GramCounts = std::map<std::string, int>;

std::vector<GramCounts> count_ngrams(const std::vector<std::string>& toks, int order) {
    std::vector<GramCounts> out(static_cast<size_t>(order));
    for (int n = 1; n <= order; ++n) {
        for (size_t i = 0; i + static_cast<size_t>(n) <= toks.size(); ++i) {
            std::string key = toks[i];
            for (int j = 1; j < n; ++j) {
                key.push_back('\x1f');
                key += toks[i + static_cast<size_t>(j)];
            }
            ++out[static_cast<size_t>(n) - 1][key];
        }
    }
    return out;
}

}  // namespace

CiderResult cider(const CaptionCorpus& corpus) {
    int order = corpus.ngram_order;
    require(order >= 1, "cider: ngram order must be >= 1, got {}", order);
    size_t n_images = corpus.items.size();
    require(n_images >= 2, "cider: IDF is undefined on a single-image corpus (got {} image{})",
            n_images, n_images == 1 ? "" : "s");
    for (size_t i = 0; i < n_images; ++i)
        require(!corpus.items[i].references.empty(), "cider: image {} ({}) has no references", i,
                corpus.items[i].image_id);

    // Document frequency: in how many images' reference sets a gram appears.
    std::vector<std::vector<std::vector<GramCounts>>> ref_counts(n_images);
    std::vector<std::vector<GramCounts>> cand_counts(n_images);
    std::map<std::string, int> df;
    for (size_t i = 0; i < n_images; ++i) {
        std::set<std::string> seen;
        for (const std::string& r : corpus.items[i].references) {
            auto counts = count_ngrams(caption_tokens(r), order);
            for (const auto& per_n : counts)
                for (const auto& [gram, cnt] : per_n) seen.insert(gram);
            ref_counts[i].push_back(std::move(counts));
        }
        for (const auto& gram : seen) ++df[gram];
        cand_counts[i] = count_ngrams(caption_tokens(corpus.items[i].candidate), order);
    }

    double log_n = std::log(static_cast<double>(n_images));
    auto idf = [&](const std::string& gram) {
        auto it = df.find(gram);
        int d = it == df.end() ? 1 : std::max(1, it->second);
        return log_n - std::log(static_cast<double>(d));
    };

    CiderResult res;
    res.per_image.resize(n_images, 0.0);
    for (size_t i = 0; i < n_images; ++i) {
        double image_score = 0.0;
        for (const auto& ref : ref_counts[i]) {
            double sim_sum = 0.0;
            for (int n = 0; n < order; ++n) {
                const GramCounts& c = cand_counts[i][static_cast<size_t>(n)];
                const GramCounts& r = ref[static_cast<size_t>(n)];
                double dot = 0.0, nc = 0.0, nr = 0.0;
                for (const auto& [gram, cnt] : c) {
                    double w = cnt * idf(gram);
                    nc += w * w;
                    auto it = r.find(gram);
                    if (it != r.end()) dot += w * (it->second * idf(gram));
                }
                for (const auto& [gram, cnt] : r) {
                    double w = cnt * idf(gram);
                    nr += w * w;
                }
                if (nc > 0.0 && nr > 0.0) sim_sum += dot / (std::sqrt(nc) * std::sqrt(nr));
            }
            image_score += sim_sum / order;
        }
        image_score /= static_cast<double>(corpus.items[i].references.size());
        res.per_image[i] = 10.0 * image_score;
        res.mean += res.per_image[i];
    }
    res.mean /= static_cast<double>(n_images);
    return res;
}

}  // namespace zv::eval
