#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace zv::eval {

inline constexpr const char* kConversation = "Conversation";
inline constexpr const char* kDetailDescription = "DetailDescription";
inline constexpr const char* kComplexReasoning = "ComplexReasoning";

struct JudgedInstance {
    std::string id;
    std::string category;  // one of the three above
    std::string context;   // symbolic scene description
    std::string question;
    std::string reference;
};

// Pluggable scorer in [0, 100]; the shipped mocks are deterministic.
class Judge {
public:
    virtual ~Judge() = default;
    virtual double score(const std::string& context, const std::string& question,
                         const std::string& reference, const std::string& candidate) = 0;
    virtual std::string name() const = 0;
};

std::unique_ptr<Judge> make_judge(const std::string& spec);  // mock-constant[:v] | mock-length | mock-overlap

struct JudgedReport {
    double con = 0.0, dd = 0.0, cr = 0.0;
    double avg = 0.0;  // unweighted mean of the three category means
    int scored = 0;
    int unscored = 0;  // instances without a candidate, excluded with a warning
    std::map<std::string, int> per_category_scored;
};

JudgedReport judged_benchmark(const std::vector<JudgedInstance>& instances,
                              const std::map<std::string, std::string>& candidates, Judge& judge);

// Reported-average audit: recompute the unweighted mean of the three
// category scores and flag the row when the printed average deviates by more
// than `tol`.
struct AvgCheckRow {
    std::string label;
    double con = 0.0, dd = 0.0, cr = 0.0;
    double printed_avg = 0.0;
};

struct AvgCheckResult {
    double recomputed = 0.0;
    double deviation = 0.0;
    bool flagged = false;
};

AvgCheckResult check_reported_avg(const AvgCheckRow& row, double tol = 0.05);

}  // namespace zv::eval
