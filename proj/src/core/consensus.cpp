#include "uq/core/consensus.hpp"

namespace uq {

std::string_view to_string(Consensus c) noexcept {
    switch (c) {
        case Consensus::None: return "none";
        case Consensus::Correct: return "correct";
        case Consensus::Incorrect: return "incorrect";
        case Consensus::Disputed: return "disputed";
    }
    return "none";
}

void to_json(json& j, const ConsensusRule& r) {
    j = json{{"min_confidence", r.min_confidence},
             {"required", r.required},
             {"strict_dissent", r.strict_dissent}};
}

void from_json(const json& j, ConsensusRule& r) {
    r.min_confidence = j.value("min_confidence", 4);
    r.required = j.value("required", 1);
    r.strict_dissent = j.value("strict_dissent", true);
}

Consensus consensus(std::span<const ReviewRecord> reviews, const ConsensusRule& rule) {
    int correct = 0;
    int incorrect = 0;
    for (const auto& r : reviews) {
        if (r.confidence < rule.min_confidence) continue;
        if (r.correctness == Correctness::Correct) ++correct;
        if (r.correctness == Correctness::Incorrect) ++incorrect;
    }
    if (rule.strict_dissent) {
        if (correct > 0 && incorrect > 0) return Consensus::Disputed;
        if (correct >= rule.required) return Consensus::Correct;
        if (incorrect >= rule.required) return Consensus::Incorrect;
        return Consensus::None;
    }
    if (correct >= rule.required && correct > incorrect) return Consensus::Correct;
    if (incorrect >= rule.required && incorrect > correct) return Consensus::Incorrect;
    if (correct > 0 && incorrect > 0) return Consensus::Disputed;
    return Consensus::None;
}

}  // namespace uq
