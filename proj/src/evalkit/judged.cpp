#include "zv/evalkit/judged.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "zv/common.hpp"
#include "zv/evalkit/normalize.hpp"

namespace zv::eval {

namespace {

class ConstantJudge final : public Judge {
public:
    explicit ConstantJudge(double v) : v_(std::clamp(v, 0.0, 100.0)) {}
    double score(const std::string&, const std::string&, const std::string&,
                 const std::string&) override {
        return v_;
    }
    std::string name() const override { return fmt::format("mock-constant:{}", v_); }

private:
    double v_;
};

// Ratio of candidate length to reference length, capped at 1.
class LengthRatioJudge final : public Judge {
public:
    double score(const std::string&, const std::string&, const std::string& reference,
                 const std::string& candidate) override {
        if (reference.empty()) return candidate.empty() ? 100.0 : 0.0;
        double r = static_cast<double>(candidate.size()) / reference.size();
        return 100.0 * std::min(1.0, r);
    }
    std::string name() const override { return "mock-length"; }
};

// Token-level F1 between candidate and reference.
class TokenOverlapJudge final : public Judge {
public:
    double score(const std::string&, const std::string&, const std::string& reference,
                 const std::string& candidate) override {
        auto rt = caption_tokens(reference);
        auto ct = caption_tokens(candidate);
        if (rt.empty() || ct.empty()) return rt.empty() && ct.empty() ? 100.0 : 0.0;
        std::multiset<std::string> rset(rt.begin(), rt.end());
        int common = 0;
        for (const auto& tok : ct) {
            auto it = rset.find(tok);
            if (it != rset.end()) {
                rset.erase(it);
                ++common;
            }
        }
        if (common == 0) return 0.0;
        double p = static_cast<double>(common) / ct.size();
        double r = static_cast<double>(common) / rt.size();
        return 100.0 * (2.0 * p * r) / (p + r);
    }
    std::string name() const override { return "mock-overlap"; }
};

}  // namespace

std::unique_ptr<Judge> make_judge(const std::string& spec) {
    if (spec.rfind("mock-constant", 0) == 0) {
        double v = 80.0;
        auto colon = spec.find(':');
        if (colon != std::string::npos) v = std::stod(spec.substr(colon + 1));
        return std::make_unique<ConstantJudge>(v);
    }
    if (spec == "mock-length") return std::make_unique<LengthRatioJudge>();
    if (spec == "mock-overlap") return std::make_unique<TokenOverlapJudge>();
    fail("unknown judge '{}', expected mock-constant[:v], mock-length or mock-overlap", spec);
}

JudgedReport judged_benchmark(const std::vector<JudgedInstance>& instances,
                              const std::map<std::string, std::string>& candidates,
                              Judge& judge) {
    JudgedReport rep;
    std::map<std::string, double> sums;
    for (const JudgedInstance& inst : instances) {
        require(inst.category == kConversation || inst.category == kDetailDescription ||
                    inst.category == kComplexReasoning,
                "judged_benchmark: instance {} has unknown category '{}'", inst.id, inst.category);
        auto it = candidates.find(inst.id);
        if (it == candidates.end()) {
            ++rep.unscored;
            continue;
        }
        double s = std::clamp(judge.score(inst.context, inst.question, inst.reference, it->second),
                              0.0, 100.0);
        sums[inst.category] += s;
        ++rep.per_category_scored[inst.category];
        ++rep.scored;
    }
    auto mean_of = [&](const char* cat) {
        auto n = rep.per_category_scored.find(cat);
        if (n == rep.per_category_scored.end() || n->second == 0) return 0.0;
        return sums[cat] / n->second;
    };
    rep.con = mean_of(kConversation);
    rep.dd = mean_of(kDetailDescription);
    rep.cr = mean_of(kComplexReasoning);
    rep.avg = (rep.con + rep.dd + rep.cr) / 3.0;
    return rep;
}

AvgCheckResult check_reported_avg(const AvgCheckRow& row, double tol) {
    AvgCheckResult res;
    res.recomputed = (row.con + row.dd + row.cr) / 3.0;
    res.deviation = std::fabs(res.recomputed - row.printed_avg);
    res.flagged = res.deviation > tol;
    return res;
}

}  // namespace zv::eval
