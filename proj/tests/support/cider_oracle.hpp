#pragma once

// Independent direct-formula caption-consensus oracle. Deliberately built on
// different structures than the library implementation (explicit gram lists
// with '|' joins, two-pass IDF table, per-order vectors assembled up front);
// shares only the tokenizer contract: lowercase, strip ASCII punctuation,
// split on whitespace.

#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace cider_oracle {

inline std::vector<std::string> tokenize(const std::string& text) {
    std::string clean;
    for (unsigned char c : text)
        if (!std::ispunct(c)) clean.push_back(static_cast<char>(std::tolower(c)));
    std::vector<std::string> toks;
    std::istringstream in(clean);
    std::string t;
    while (in >> t) toks.push_back(t);
    return toks;
}

inline std::vector<std::string> grams_of(const std::vector<std::string>& toks, int n) {
    std::vector<std::string> out;
    for (size_t i = 0; i + static_cast<size_t>(n) <= toks.size(); ++i) {
        std::string g = toks[i];
        for (int k = 1; k < n; ++k) g += "|" + toks[i + static_cast<size_t>(k)];
        out.push_back(g);
    }
    return out;
}

struct Item {
    std::vector<std::string> refs;
    std::string cand;
};

// per-image scores (x10 scale) and corpus mean
inline std::pair<std::vector<double>, double> score(const std::vector<Item>& items, int order) {
    size_t n_img = items.size();
    // pass 1: document frequencies over reference sets
    std::map<std::string, int> df;
    for (const auto& item : items) {
        std::set<std::string> seen;
        for (const auto& r : item.refs) {
            auto toks = tokenize(r);
            for (int n = 1; n <= order; ++n)
                for (const auto& g : grams_of(toks, n)) seen.insert(g);
        }
        for (const auto& g : seen) ++df[g];
    }
    auto weight = [&](const std::string& g, int count) {
        auto it = df.find(g);
        double d = it == df.end() ? 1.0 : std::max(1, it->second);
        return count * (std::log(static_cast<double>(n_img)) - std::log(d));
    };

    // pass 2: per-image cosine averaged over orders and references
    std::vector<double> per_image;
    double total = 0.0;
    for (const auto& item : items) {
        auto cand_toks = tokenize(item.cand);
        double ref_sum = 0.0;
        for (const auto& r : item.refs) {
            auto ref_toks = tokenize(r);
            double order_sum = 0.0;
            for (int n = 1; n <= order; ++n) {
                std::map<std::string, int> cc, rc;
                for (const auto& g : grams_of(cand_toks, n)) ++cc[g];
                for (const auto& g : grams_of(ref_toks, n)) ++rc[g];
                double dot = 0.0, nc = 0.0, nr = 0.0;
                for (const auto& [g, c] : cc) {
                    double w = weight(g, c);
                    nc += w * w;
                    auto it = rc.find(g);
                    if (it != rc.end()) dot += w * weight(g, it->second);
                }
                for (const auto& [g, c] : rc) {
                    double w = weight(g, c);
                    nr += w * w;
                }
                if (nc > 0 && nr > 0) order_sum += dot / std::sqrt(nc) / std::sqrt(nr);
            }
            ref_sum += order_sum / order;
        }
        double s = 10.0 * ref_sum / static_cast<double>(item.refs.size());
        per_image.push_back(s);
        total += s;
    }
    return {per_image, total / static_cast<double>(n_img)};
}

}  // namespace cider_oracle
