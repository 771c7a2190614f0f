#include "uq/strategy/judge.hpp"

#include <regex>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq::strategy {

namespace {

using gateway::Message;
using gateway::Role;

const std::regex& marker_regex() {
    static const std::regex re(R"(\[\[\s*([YyNn])\s*\]\])");
    return re;
}

std::string or_none(const std::string& s) { return s.empty() ? std::string("(none)") : s; }

std::string join_tags(const std::vector<std::string>& tags) {
    std::string out;
    for (const auto& t : tags) {
        if (!out.empty()) out += ", ";
        out += t;
    }
    return out;
}

void require(bool ok, std::string_view what, CheckKind check) {
    if (!ok) {
        throw Error(Errc::MissingSlot,
                    fmt::format("{} is required by the {} prompt", what, template_name(check)));
    }
}

void charge(gateway::LedgerEntry& cost, const gateway::ModelReply& reply) {
    if (reply.cached) return;
    cost.calls += 1;
    cost.input_tokens += reply.usage.input;
    cost.output_tokens += reply.usage.output;
}

}  // namespace

std::optional<ParsedVerdict> try_parse_verdict(std::string_view reply, std::string_view label) {
    std::cmatch last;
    bool found = false;
    for (std::cregex_iterator it(reply.data(), reply.data() + reply.size(), marker_regex()), end;
         it != end; ++it) {
        last = *it;
        found = true;
    }
    if (!found) return std::nullopt;

    const auto c = last.str(1)[0];
    ParsedVerdict out;
    out.verdict = (c == 'Y' || c == 'y') ? Verdict::Pass : Verdict::Fail;

    const auto start = static_cast<std::size_t>(last.position(0));
    const auto stop = start + static_cast<std::size_t>(last.length(0));
    std::size_t from = start;
    if (!label.empty()) {
        const auto line_start = reply.rfind('\n', start == 0 ? 0 : start - 1);
        const auto floor = line_start == std::string_view::npos ? 0 : line_start + 1;
        const auto at = reply.substr(floor, start - floor).rfind(label);
        if (at != std::string_view::npos) from = floor + at;
    }
    out.marker_text = std::string(reply.substr(from, stop - from));
    return out;
}

ParsedVerdict parse_verdict(std::string_view reply, CheckKind check) {
    if (auto v = try_parse_verdict(reply, marker_label(check))) return *v;
    throw Error(Errc::UnparsableVerdict,
                fmt::format("no [[Y]]/[[N]] marker in {} reply", template_name(check)));
}

std::vector<Message> render_prompt(const PromptPack& prompts, CheckKind check,
                                   const QuestionRecord& question, const CandidateAnswer& answer,
                                   const std::optional<std::string>& inferred_question) {
    require(!question.title.empty(), "question title", check);
    require(!question.body.empty(), "question body", check);
    require(!question.site.empty(), "question site", check);
    require(!answer.text.empty(), "answer text", check);
    if (check == CheckKind::CycleConsistency) {
        require(inferred_question && !inferred_question->empty(), "inferred question", check);
    }
    std::map<std::string, std::string, std::less<>> slots{
        {"Question Title", question.title},
        {"Keywords", or_none(join_tags(question.tags))},
        {"Category", or_none(question.category.value_or(""))},
        {"Site", question.site},
        {"Question Body", question.body},
        {"Answer", answer.text},
        {"answer", answer.text},
    };
    if (inferred_question) slots.emplace("inferred_question", *inferred_question);
    return {Message{Role::User, substitute(prompts.get(template_name(check)), slots)}};
}

std::string reask_message(CheckKind check) {
    const auto label = marker_label(check);
    return fmt::format("You must end with {0}: [[Y]] or {0}: [[N]].", label);
}

std::vector<Verdict> JudgmentStep::turn_verdicts() const {
    std::vector<Verdict> out;
    out.reserve(turns.size());
    for (const auto& t : turns) out.push_back(t.parsed);
    return out;
}

CheckRunner::CheckRunner(gateway::Gateway& gateway, PromptPack prompts)
    : gateway_(gateway), prompts_(std::move(prompts)) {}

Inference CheckRunner::infer_question(const CandidateAnswer& answer, const std::string& judge_model,
                                      const std::string& step_path) {
    if (answer.text.empty()) {
        throw Error(Errc::InvalidInput, "cannot infer a question from an empty answer");
    }
    std::map<std::string, std::string, std::less<>> slots{{"answer", answer.text},
                                                          {"Answer", answer.text}};
    gateway::ModelCall call;
    call.model_id = judge_model;
    call.messages = {Message{Role::User, substitute(prompts_.get("infer_question"), slots)}};
    call.temperature = gateway::kJudgeTemperature;
    call.tags.purpose = "infer";
    call.tags.answer_id = answer.answer_id;
    call.tags.answer_model = answer.model_id;
    call.tags.step_path = step_path;
    const auto reply = gateway_.complete(call);
    Inference out;
    out.question = reply.text;
    charge(out.cost, reply);
    return out;
}

JudgmentStep CheckRunner::run_check(const QuestionRecord& question, const CandidateAnswer& answer,
                                    const CheckRequest& request) {
    if (request.reflect_depth < 0) {
        throw Error(Errc::InvalidInput, "reflect_depth must be ≥ 0");
    }
    JudgmentStep step;
    step.step_path = request.step_path;
    step.check = request.check;
    step.judge_model = request.judge_model;
    step.sample_index = request.sample_index;
    step.reflect_depth = request.reflect_depth;
    step.inferred_question = request.inferred_question;
    step.transcript = render_prompt(prompts_, request.check, question, answer, request.inferred_question);

    const auto label = marker_label(request.check);
    gateway::ModelCall call;
    call.model_id = request.judge_model;
    call.temperature = gateway::kJudgeTemperature;
    call.attempt_index = request.sample_index;
    call.tags.purpose = "judge";
    call.tags.check = std::string(slug(request.check));
    call.tags.marker_label = std::string(label);
    call.tags.question_id = question.id;
    call.tags.answer_id = answer.answer_id;
    call.tags.answer_model = answer.model_id;
    call.tags.step_path = request.step_path;

    for (int t = 0; t <= request.reflect_depth; ++t) {
        Turn turn;
        if (t > 0) {
            turn.delta.push_back(Message{Role::User, prompts_.get("reflection")});
            step.transcript.push_back(turn.delta.back());
        }
        std::optional<ParsedVerdict> parsed;
        for (int ask = 0; ask < 2 && !parsed; ++ask) {
            if (ask > 0) {
                turn.delta.push_back(Message{Role::User, reask_message(request.check)});
                step.transcript.push_back(turn.delta.back());
                ++turn.reasks;
                ++step.reasks;
            } else {
                ++step.judge_calls;
            }
            call.messages = step.transcript;
            const auto reply = gateway_.complete(call);
            charge(step.cost, reply);
            turn.delta.push_back(Message{Role::Assistant, reply.text});
            step.transcript.push_back(turn.delta.back());
            parsed = try_parse_verdict(reply.text, label);
        }
        if (!parsed) {
            throw Error(Errc::UnparsableVerdict,
                        fmt::format("{} judge {} gave no verdict marker for answer '{}' after a re-ask",
                                    slug(request.check), request.judge_model, answer.answer_id));
        }
        turn.parsed = parsed->verdict;
        turn.marker_text = parsed->marker_text;
        step.parsed = turn.parsed;
        step.marker_text = turn.marker_text;
        step.turns.push_back(std::move(turn));
        if (request.stop && t < request.reflect_depth && request.stop(step.parsed)) {
            step.stopped_early = true;
            break;
        }
    }
    return step;
}

void to_json(json& j, const Turn& t) {
    j = json{{"delta", t.delta},
             {"parsed", t.parsed},
             {"marker_text", t.marker_text},
             {"reasks", t.reasks}};
}

void from_json(const json& j, Turn& t) {
    t.delta = j.at("delta").get<std::vector<Message>>();
    t.parsed = j.at("parsed").get<Verdict>();
    t.marker_text = j.value("marker_text", std::string{});
    t.reasks = j.value("reasks", 0);
}

void to_json(json& j, const JudgmentStep& s) {
    json reflections = json::array();
    for (std::size_t i = 1; i < s.turns.size(); ++i) {
        reflections.push_back(json{{"transcript_delta", s.turns[i].delta},
                                   {"parsed", s.turns[i].parsed},
                                   {"marker_text", s.turns[i].marker_text},
                                   {"reasks", s.turns[i].reasks}});
    }
    j = json{{"step_path", s.step_path},
             {"check", std::string(slug(s.check))},
             {"judge_model", s.judge_model},
             {"sample_index", s.sample_index},
             {"reflect_depth", s.reflect_depth},
             {"transcript", s.transcript},
             {"initial", s.turns.empty() ? json(nullptr) : json(s.turns.front().parsed)},
             {"reflections", reflections},
             {"parsed", s.parsed},
             {"marker_text", s.marker_text},
             {"stopped_early", s.stopped_early},
             {"judge_calls", s.judge_calls},
             {"reasks", s.reasks},
             {"aux_calls", s.aux_calls},
             {"cost", s.cost}};
    if (!s.turns.empty()) j["initial_reasks"] = s.turns.front().reasks;
    if (s.inferred_question) j["inferred_question"] = *s.inferred_question;
}

void from_json(const json& j, JudgmentStep& s) {
    s.step_path = j.value("step_path", std::string{});
    s.check = parse_check(j.at("check").get<std::string>());
    s.judge_model = j.value("judge_model", std::string{});
    s.sample_index = j.value("sample_index", 0);
    s.reflect_depth = j.value("reflect_depth", 0);
    s.transcript = j.value("transcript", std::vector<Message>{});
    s.parsed = j.at("parsed").get<Verdict>();
    s.marker_text = j.value("marker_text", std::string{});
    s.stopped_early = j.value("stopped_early", false);
    s.judge_calls = j.value("judge_calls", 0);
    s.reasks = j.value("reasks", 0);
    s.aux_calls = j.value("aux_calls", 0);
    s.cost = j.value("cost", gateway::LedgerEntry{});
    if (auto it = j.find("inferred_question"); it != j.end() && it->is_string()) {
        s.inferred_question = it->get<std::string>();
    } else {
        s.inferred_question.reset();
    }
    // Rebuild turns from the stored verdicts; message deltas of the initial
    // turn are recoverable from the transcript but not needed downstream.
    s.turns.clear();
    if (auto it = j.find("initial"); it != j.end() && !it->is_null()) {
        Turn first;
        first.parsed = it->get<Verdict>();
        first.reasks = j.value("initial_reasks", 0);
        s.turns.push_back(std::move(first));
        for (const auto& r : j.value("reflections", json::array())) {
            Turn t;
            t.delta = r.value("transcript_delta", std::vector<Message>{});
            t.parsed = r.at("parsed").get<Verdict>();
            t.marker_text = r.value("marker_text", std::string{});
            t.reasks = r.value("reasks", 0);
            s.turns.push_back(std::move(t));
        }
        if (s.turns.size() == 1) s.turns.front().marker_text = s.marker_text;
    }
}

}  // namespace uq::strategy
