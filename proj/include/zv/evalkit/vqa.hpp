#pragma once

#include <string>
#include <vector>

namespace zv::eval {

struct VQARecord {
    std::string question;
    std::vector<std::string> answers;  // ground truth, typically 10
    std::string prediction;
};

// min(#matching ground-truth answers / 3, 1) after normalization.
double vqa_score(const VQARecord& record);

int exact_match(const std::string& prediction, const std::string& target);

// Mean exact match over (prediction, target) pairs.
double accuracy(const std::vector<std::pair<std::string, std::string>>& pairs);

// Constrained multi-choice decoding: highest-scoring option wins, ties go to
// the lower index.
int pick_option(const std::vector<std::string>& options, const std::vector<double>& scores);

}  // namespace zv::eval
