#include "uq/curation/llm_filter.hpp"

#include <regex>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq::curation {

namespace {

using gateway::Message;
using gateway::Role;

// "Name: value" with optional markdown emphasis around the name or colon.
std::regex field(std::string_view name, std::string_view value) {
    return std::regex(fmt::format(R"({}[\s*_]*:[\s*_]*{})", name, value), std::regex::icase);
}

std::optional<std::string> last_match(std::string_view text, const std::regex& re) {
    std::optional<std::string> out;
    for (std::cregex_iterator it(text.data(), text.data() + text.size(), re), end; it != end; ++it) {
        out = (*it)[1].str();
    }
    return out;
}

std::optional<double> percent(std::string_view text, const std::regex& re) {
    auto m = last_match(text, re);
    if (!m) return std::nullopt;
    const double v = std::stod(*m);
    if (v < 0.0 || v > 100.0) return std::nullopt;
    return v;
}

std::optional<bool> yes_no(std::string_view text, const std::regex& re) {
    auto m = last_match(text, re);
    if (!m) return std::nullopt;
    return (*m)[0] == 'Y' || (*m)[0] == 'y';
}

constexpr std::string_view kReask =
    "Please restate your evaluation in exactly this format:\n"
    "Answer_Correctness: NN%\nExpert_Solve_Probability: NN%\nAnswerable: Yes or No\n"
    "Clear: Yes or No\nUnambiguous_Answer: Yes or No";

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

}  // namespace

std::optional<QualityCall> parse_quality(std::string_view reply) {
    static const std::regex correctness = field(R"(Answer[_ ]Correctness)", R"((\d+(?:\.\d+)?)\s*%?)");
    static const std::regex solvability =
        field(R"(Expert[_ ]Solve[_ ]Probability)", R"((\d+(?:\.\d+)?)\s*%?)");
    static const std::regex answerable = field(R"(\bAnswerable)", R"((Yes|No)\b)");
    static const std::regex clear = field(R"(\bClear)", R"((Yes|No)\b)");
    static const std::regex unambiguous = field(R"(Unambiguous[_ ]Answer)", R"((Yes|No)\b)");

    QualityCall c;
    auto ac = percent(reply, correctness);
    auto es = percent(reply, solvability);
    auto a = yes_no(reply, answerable);
    auto w = yes_no(reply, clear);
    auto o = yes_no(reply, unambiguous);
    if (!ac || !es || !a || !w || !o) return std::nullopt;
    c.answer_correctness = *ac;
    c.expert_solvability = *es;
    c.approachable = *a;
    c.well_defined = *w;
    c.objective = *o;
    return c;
}

std::string format_quality_reply(const QualityCall& c) {
    auto yn = [](bool b) { return b ? "Yes" : "No"; };
    return fmt::format(
        "1. Answer_Correctness: {}%\n2. Expert_Solve_Probability: {}%\n3. Answerable: {}\n4. Clear: {}\n"
        "5. Unambiguous_Answer: {}",
        c.answer_correctness, c.expert_solvability, yn(c.approachable), yn(c.well_defined), yn(c.objective));
}

QualityJudgment aggregate_quality(const std::vector<QualityCall>& calls) {
    if (calls.empty()) throw Error(Errc::InvalidInput, "no filtering judgments to aggregate");
    QualityJudgment j;
    j.calls = calls;
    j.well_defined = j.approachable = j.objective = true;
    for (const auto& c : calls) {
        j.answer_correctness += c.answer_correctness;
        j.expert_solvability += c.expert_solvability;
        j.well_defined = j.well_defined && c.well_defined;
        j.approachable = j.approachable && c.approachable;
        j.objective = j.objective && c.objective;
    }
    j.answer_correctness /= static_cast<double>(calls.size());
    j.expert_solvability /= static_cast<double>(calls.size());
    return j;
}

bool keep_question(const QualityJudgment& j, const LlmFilterThresholds& t) {
    return j.answer_correctness <= t.max_answer_correctness &&
           j.expert_solvability <= t.max_expert_solvability && j.well_defined && j.approachable &&
           j.objective;
}

LlmFilterResult llm_filter(gateway::Gateway& gateway, const strategy::PromptPack& prompts,
                           const QuestionRecord& question, const std::string& answer_model,
                           const std::string& judge_model, const LlmFilterOptions& options) {
    if (options.judge_calls < 1) throw Error(Errc::InvalidInput, "judge_calls must be ≥ 1");
    LlmFilterResult out;
    out.question_id = question.id;
    out.answer_model = answer_model;
    out.judge_model = judge_model;

    gateway::ModelCall gen;
    gen.model_id = answer_model;
    gen.temperature = gateway::kAnswerTemperature;
    gen.tags.purpose = "answer";
    gen.tags.question_id = question.id;
    gen.messages = {Message{Role::User, strategy::substitute(prompts.get("answer_generation"),
                                                             {{"Question Title", question.title},
                                                              {"Question Body", question.body}})}};
    out.candidate_answer = gateway.complete(gen).text;

    const auto prompt = strategy::substitute(prompts.get("llm_filter"),
                                             {{"question title", question.title},
                                              {"question body", question.body},
                                              {"tags", join(question.tags)},
                                              {"source", question.site},
                                              {"model_answer", out.candidate_answer}});
    std::vector<QualityCall> calls;
    for (int i = 0; i < options.judge_calls; ++i) {
        gateway::ModelCall call;
        call.model_id = judge_model;
        call.temperature = gateway::kJudgeTemperature;
        call.attempt_index = i;
        call.tags.purpose = "filter";
        call.tags.question_id = question.id;
        call.messages = {Message{Role::User, prompt}};
        auto reply = gateway.complete(call);
        auto parsed = parse_quality(reply.text);
        if (!parsed) {
            call.messages.push_back(Message{Role::Assistant, reply.text});
            call.messages.push_back(Message{Role::User, std::string(kReask)});
            parsed = parse_quality(gateway.complete(call).text);
        }
        if (!parsed) {
            throw Error(Errc::UnparsableJudgment,
                        fmt::format("filter judge {} gave an unreadable rating for '{}' after a re-ask",
                                    judge_model, question.id));
        }
        calls.push_back(*parsed);
    }
    out.judgment = aggregate_quality(calls);
    out.keep = keep_question(out.judgment, options.thresholds);
    return out;
}

void to_json(json& j, const QualityCall& c) {
    j = json{{"answer_correctness", c.answer_correctness},
             {"expert_solvability", c.expert_solvability},
             {"approachable", c.approachable},
             {"well_defined", c.well_defined},
             {"objective", c.objective}};
}

void to_json(json& j, const QualityJudgment& q) {
    j = json{{"answer_correctness", q.answer_correctness},
             {"expert_solvability", q.expert_solvability},
             {"well_defined", q.well_defined},
             {"approachable", q.approachable},
             {"objective", q.objective},
             {"calls", q.calls}};
}

void to_json(json& j, const LlmFilterResult& r) {
    j = json{{"question_id", r.question_id},
             {"answer_model", r.answer_model},
             {"judge_model", r.judge_model},
             {"candidate_answer", r.candidate_answer},
             {"judgment", r.judgment},
             {"keep", r.keep}};
}

}  // namespace uq::curation
