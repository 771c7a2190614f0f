#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uq/core/json.hpp"
#include "uq/core/types.hpp"
#include "uq/gateway/gateway.hpp"
#include "uq/strategy/prompt_pack.hpp"

namespace uq::curation {

// One judge reply to the filtering prompt.
struct QualityCall {
    double answer_correctness = 0;  // percent
    double expert_solvability = 0;  // percent
    bool approachable = false;      // "Answerable"
    bool well_defined = false;      // "Clear"
    bool objective = false;         // "Unambiguous_Answer"
};

// Reads the five criteria from a reply. Percentages may be written "35%" or
// "35"; the last occurrence of each criterion counts. Empty when any
// criterion is missing or a percentage is outside 0–100.
std::optional<QualityCall> parse_quality(std::string_view reply);

// A reply in the shape the parser reads; used by mock scripts.
std::string format_quality_reply(const QualityCall& call);

struct QualityJudgment {
    double answer_correctness = 0;  // mean of the calls
    double expert_solvability = 0;
    bool well_defined = false;  // unanimous across the calls
    bool approachable = false;
    bool objective = false;
    std::vector<QualityCall> calls;
};

struct LlmFilterThresholds {
    double max_answer_correctness = 40.0;
    double max_expert_solvability = 70.0;
};

// Throws Error(InvalidInput) when `calls` is empty.
QualityJudgment aggregate_quality(const std::vector<QualityCall>& calls);
bool keep_question(const QualityJudgment& j, const LlmFilterThresholds& t = {});

struct LlmFilterResult {
    std::string question_id;
    std::string answer_model;
    std::string judge_model;
    std::string candidate_answer;
    QualityJudgment judgment;
    bool keep = false;
};

struct LlmFilterOptions {
    int judge_calls = 3;
    LlmFilterThresholds thresholds;
};

// The answer model drafts one answer (temperature 0.3); the judge model then
// rates the question with the filtering prompt `judge_calls` times.
// Throws Error(UnparsableJudgment) when a reply stays unreadable after one
// re-ask.
LlmFilterResult llm_filter(gateway::Gateway& gateway, const strategy::PromptPack& prompts,
                           const QuestionRecord& question, const std::string& answer_model,
                           const std::string& judge_model, const LlmFilterOptions& options = {});

void to_json(json& j, const QualityCall& c);
void to_json(json& j, const QualityJudgment& q);
void to_json(json& j, const LlmFilterResult& r);

}  // namespace uq::curation
