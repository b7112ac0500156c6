#include "zv/evalkit/vqa.hpp"

#include <algorithm>

#include "zv/common.hpp"
#include "zv/evalkit/normalize.hpp"

namespace zv::eval {

double vqa_score(const VQARecord& record) {
    require(!record.answers.empty(), "vqa_score: record has no ground-truth answers");
    std::string pred = normalize_answer(record.prediction);
    int matches = 0;
    for (const std::string& a : record.answers)
        if (normalize_answer(a) == pred) ++matches;
    return std::min(1.0, matches / 3.0);
}

int exact_match(const std::string& prediction, const std::string& target) {
    return normalize_answer(prediction) == normalize_answer(target) ? 1 : 0;
}

double accuracy(const std::vector<std::pair<std::string, std::string>>& pairs) {
    require(!pairs.empty(), "accuracy: no records");
    double total = 0.0;
    for (const auto& [pred, target] : pairs) total += exact_match(pred, target);
    return total / static_cast<double>(pairs.size());
}

int pick_option(const std::vector<std::string>& options, const std::vector<double>& scores) {
    require(!options.empty(), "pick_option: empty option set");
    require(options.size() == scores.size(), "pick_option: {} options but {} scores",
            options.size(), scores.size());
    int best = 0;
    for (size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[static_cast<size_t>(best)]) best = static_cast<int>(i);
    return best;
}

}  // namespace zv::eval
