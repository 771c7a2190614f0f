#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uq/core/json.hpp"
#include "uq/core/types.hpp"
#include "uq/gateway/gateway.hpp"
#include "uq/gateway/model_call.hpp"
#include "uq/strategy/check.hpp"
#include "uq/strategy/prompt_pack.hpp"

namespace uq::strategy {

struct ParsedVerdict {
    Verdict verdict = Verdict::Fail;
    // The matched marker, with the label in front of it when the reply has one
    // on the same line, e.g. "Accepted: [[Y]]".
    std::string marker_text;
};

// Last `[[Y]]`/`[[N]]` marker wins. Whitespace inside the brackets and lower
// case letters are tolerated.
std::optional<ParsedVerdict> try_parse_verdict(std::string_view reply, std::string_view label = {});
// Throws Error(UnparsableVerdict) when no marker is present.
ParsedVerdict parse_verdict(std::string_view reply, CheckKind check);

std::vector<gateway::Message> render_prompt(const PromptPack& prompts, CheckKind check,
                                            const QuestionRecord& question,
                                            const CandidateAnswer& answer,
                                            const std::optional<std::string>& inferred_question = {});

// Follow-up sent once when a reply carries no marker.
std::string reask_message(CheckKind check);

struct Turn {
    // Messages this turn added to the conversation, ending with the judge's reply.
    std::vector<gateway::Message> delta;
    Verdict parsed = Verdict::Fail;
    std::string marker_text;
    int reasks = 0;
};

struct JudgmentStep {
    std::string step_path;
    CheckKind check = CheckKind::Correctness;
    std::string judge_model;
    int sample_index = 0;
    int reflect_depth = 0;
    std::vector<gateway::Message> transcript;
    // turns[0] is the initial judgment; the rest are reflection turns.
    std::vector<Turn> turns;
    Verdict parsed = Verdict::Fail;
    std::string marker_text;
    std::optional<std::string> inferred_question;
    bool stopped_early = false;
    // Judging turns issued (re-asks excluded).
    int judge_calls = 0;
    int reasks = 0;
    // Question-inference calls charged to this step.
    int aux_calls = 0;
    // Calls that reached a backend (cache hits excluded), including re-asks
    // and inference.
    gateway::LedgerEntry cost;

    std::vector<Verdict> turn_verdicts() const;
};

void to_json(json& j, const Turn& t);
void from_json(const json& j, Turn& t);
void to_json(json& j, const JudgmentStep& s);
void from_json(const json& j, JudgmentStep& s);

struct CheckRequest {
    CheckKind check = CheckKind::Correctness;
    std::string judge_model;
    int reflect_depth = 0;
    int sample_index = 0;
    std::string step_path;
    // Required for cycle consistency; produced by `infer_question`.
    std::optional<std::string> inferred_question;
    // Consulted after each turn; returning true skips the remaining turns.
    std::function<bool(Verdict)> stop;
};

struct Inference {
    std::string question;
    gateway::LedgerEntry cost;
};

// Issues judge calls through the gateway. Safe to share between threads.
class CheckRunner {
public:
    CheckRunner(gateway::Gateway& gateway, PromptPack prompts);

    // The judge sees only the answer text.
    Inference infer_question(const CandidateAnswer& answer, const std::string& judge_model,
                             const std::string& step_path = {});

    JudgmentStep run_check(const QuestionRecord& question, const CandidateAnswer& answer,
                           const CheckRequest& request);

    const PromptPack& prompts() const { return prompts_; }

private:
    gateway::Gateway& gateway_;
    PromptPack prompts_;
};

}  // namespace uq::strategy
