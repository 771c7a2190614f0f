#include "uq/core/validate.hpp"

#include <set>
#include <utility>

#include <fmt/format.h>

namespace uq {

std::vector<std::string> validate_record(const QuestionRecord& q) {
    std::vector<std::string> out;
    if (q.id.empty()) out.emplace_back("id must be nonempty");
    if (q.views < 0) out.emplace_back("views must be ≥ 0");
    if (q.answer_count < 0) out.emplace_back("answer_count must be ≥ 0");
    if (q.body.empty()) out.emplace_back("body must be nonempty");
    return out;
}

std::vector<std::string> validate_record(const CandidateAnswer& a) {
    std::vector<std::string> out;
    if (a.question_id.empty()) out.emplace_back("question_id must be nonempty");
    if (a.answer_id.empty()) out.emplace_back("answer_id must be nonempty");
    if (a.text.empty()) out.emplace_back("text must be nonempty");
    if (a.sampling.temperature < 0.0) out.emplace_back("temperature must be ≥ 0");
    return out;
}

std::vector<std::string> validate_record(const LabeledPair& p) {
    auto out = validate_record(p.question);
    for (auto& v : validate_record(p.answer)) out.push_back("answer: " + v);
    if (p.answer.question_id != p.question.id) {
        out.emplace_back("answer.question_id must match question.id");
    }
    return out;
}

std::vector<std::string> validate_record(const ReviewRecord& r) {
    std::vector<std::string> out;
    if (r.answer_id.empty()) out.emplace_back("answer_id must be nonempty");
    if (r.confidence < 1 || r.confidence > 5) out.emplace_back("confidence ∈ [1,5]");
    return out;
}

std::vector<std::string> validate_dataset(const std::vector<QuestionRecord>& qs) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& q : qs) {
        for (auto& v : validate_record(q)) out.push_back(fmt::format("{}: {}", q.id, v));
        if (!seen.insert(q.id).second) out.push_back(fmt::format("duplicate id '{}'", q.id));
    }
    return out;
}

std::vector<std::string> validate_dataset(const std::vector<CandidateAnswer>& as) {
    std::vector<std::string> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& a : as) {
        for (auto& v : validate_record(a)) out.push_back(fmt::format("{}: {}", a.answer_id, v));
        if (!seen.emplace(a.question_id, a.answer_id).second) {
            out.push_back(fmt::format("duplicate answer_id '{}' for question '{}'", a.answer_id,
                                      a.question_id));
        }
    }
    return out;
}

}  // namespace uq
