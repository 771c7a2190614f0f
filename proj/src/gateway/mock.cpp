#include "uq/gateway/mock.hpp"

#include <fmt/format.h>

#include "uq/core/error.hpp"
#include "uq/core/jsonl.hpp"
#include "uq/core/random.hpp"

namespace uq::gateway {

namespace {

ModelReply make_reply(const ModelCall& call, std::string text) {
    ModelReply reply;
    std::int64_t input = 0;
    for (const auto& m : call.messages) input += estimate_tokens(m.content);
    reply.usage = {input, estimate_tokens(text)};
    reply.text = std::move(text);
    return reply;
}

std::string label_or_default(const ModelCall& call) {
    return call.tags.marker_label.empty() ? std::string("Accepted") : call.tags.marker_label;
}

}  // namespace

std::string format_marker_reply(std::string_view label, Verdict v, std::string_view reasoning) {
    const char* mark = v == Verdict::Pass ? "[[Y]]" : "[[N]]";
    if (reasoning.empty()) return fmt::format("{}: {}", label, mark);
    return fmt::format("{}\n\n{}: {}", reasoning, label, mark);
}

ModelReply LambdaBackend::complete(const ModelCall& call) { return make_reply(call, fn_(call)); }

ScriptedBackend::ScriptedBackend(const json& script, std::optional<std::uint64_t> seed_override) {
    if (!script.is_object()) throw Error(Errc::InvalidInput, "mock script must be a JSON object");
    seed_ = seed_override.value_or(script.value("seed", std::uint64_t{0}));
    if (auto it = script.find("default"); it != script.end() && it->is_string()) {
        default_reply_ = it->get<std::string>();
    }
    for (const auto& jr : script.value("rules", json::array())) {
        Rule r;
        auto opt_str = [&](const char* key, std::optional<std::string>& out) {
            if (jr.contains(key)) out = jr.at(key).get<std::string>();
        };
        opt_str("model", r.model);
        opt_str("purpose", r.purpose);
        opt_str("check", r.check);
        opt_str("answer_id", r.answer_id);
        opt_str("question_id", r.question_id);
        opt_str("contains", r.contains);
        if (jr.contains("sample")) r.sample = jr.at("sample").get<int>();
        if (jr.contains("turn")) r.turn = jr.at("turn").get<int>();
        if (jr.contains("reply")) r.replies.push_back(jr.at("reply").get<std::string>());
        if (jr.contains("replies")) {
            for (const auto& s : jr.at("replies")) r.replies.push_back(s.get<std::string>());
        }
        if (jr.contains("pass_probability")) {
            const double p = jr.at("pass_probability").get<double>();
            if (p < 0.0 || p > 1.0) {
                throw Error(Errc::InvalidInput, "pass_probability must lie in [0,1]");
            }
            r.pass_probability = p;
        }
        if (r.replies.empty() && !r.pass_probability) {
            throw Error(Errc::InvalidInput, "mock rule needs reply, replies or pass_probability");
        }
        rules_.push_back(std::move(r));
    }
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path,
                                                            std::optional<std::uint64_t> seed) {
    json script;
    try {
        script = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidInput, fmt::format("{}: {}", path, e.what()));
    }
    return std::make_shared<ScriptedBackend>(script, seed);
}

bool ScriptedBackend::matches(const Rule& r, const ModelCall& call) const {
    if (r.model && *r.model != call.model_id) return false;
    if (r.purpose && *r.purpose != call.tags.purpose) return false;
    if (r.check && *r.check != call.tags.check) return false;
    if (r.answer_id && *r.answer_id != call.tags.answer_id) return false;
    if (r.question_id && *r.question_id != call.tags.question_id) return false;
    if (r.sample && *r.sample != call.attempt_index) return false;
    if (r.turn && *r.turn != call.turn()) return false;
    if (r.contains) {
        bool found = false;
        for (const auto& m : call.messages) {
            if (m.content.find(*r.contains) != std::string::npos) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

std::string ScriptedBackend::respond(const Rule& r, const ModelCall& call) const {
    if (!r.replies.empty()) {
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(call.turn()), r.replies.size() - 1);
        return r.replies[idx];
    }
    const auto identity = fmt::format("{}|{}|{}|{}|{}|{}", call.model_id, call.tags.answer_id,
                                      call.tags.step_path, call.attempt_index, call.turn(),
                                      call.messages.back().content.size());
    const double u = unit_interval(stable_hash(identity, seed_));
    const auto v = u < *r.pass_probability ? Verdict::Pass : Verdict::Fail;
    return format_marker_reply(label_or_default(call), v, "Scripted judgment.");
}

ModelReply ScriptedBackend::complete(const ModelCall& call) {
    for (const auto& r : rules_) {
        if (matches(r, call)) return make_reply(call, respond(r, call));
    }
    if (default_reply_) return make_reply(call, *default_reply_);
    throw Error(Errc::InvalidInput,
                fmt::format("mock script has no reply for model '{}' (purpose '{}', check '{}')",
                            call.model_id, call.tags.purpose, call.tags.check));
}

void TruthTable::set(const std::string& answer_id, GroundTruth truth) {
    std::unique_lock lock(mutex_);
    truth_[answer_id] = truth;
}

std::optional<GroundTruth> TruthTable::get(const std::string& answer_id) const {
    std::shared_lock lock(mutex_);
    if (auto it = truth_.find(answer_id); it != truth_.end()) return it->second;
    return std::nullopt;
}

std::size_t TruthTable::size() const {
    std::shared_lock lock(mutex_);
    return truth_.size();
}

namespace {

void check_rates(const JudgeRates& r) {
    if (!(r.tpr >= 0.0 && r.tpr <= 1.0 && r.fpr >= 0.0 && r.fpr <= 1.0)) {
        throw Error(Errc::InvalidInput,
                    fmt::format("judge rates must lie in [0,1] (tpr={}, fpr={})", r.tpr, r.fpr));
    }
}

}  // namespace

ScriptedJudge::ScriptedJudge(JudgeRates rates, std::uint64_t seed,
                             std::shared_ptr<const TruthTable> truth)
    : rates_(rates), seed_(seed), truth_(std::move(truth)) {
    check_rates(rates_);
    if (!truth_) throw Error(Errc::InvalidInput, "scripted judge needs a truth table");
}

void ScriptedJudge::set_rates_for_answer_model(const std::string& answer_model, JudgeRates rates) {
    check_rates(rates);
    per_answer_model_[answer_model] = rates;
}

ModelReply ScriptedJudge::complete(const ModelCall& call) {
    const auto& tags = call.tags;
    if (tags.purpose == "infer") {
        return make_reply(call, fmt::format("What question does answer {} respond to?", tags.answer_id));
    }
    if (tags.purpose == "answer") {
        return make_reply(call, fmt::format("Synthetic answer to {}.", tags.question_id));
    }
    const auto truth = truth_->get(tags.answer_id);
    if (!truth) {
        throw Error(Errc::InvalidInput,
                    fmt::format("scripted judge has no ground truth for answer '{}'", tags.answer_id));
    }
    auto rates = rates_;
    if (auto it = per_answer_model_.find(tags.answer_model); it != per_answer_model_.end()) {
        rates = it->second;
    }
    const double p = *truth == GroundTruth::Correct ? rates.tpr : rates.fpr;
    const auto identity = fmt::format("{}|{}|{}|{}|{}|{}", call.model_id, tags.answer_id,
                                      tags.step_path, tags.check, call.attempt_index, call.turn());
    const double u = unit_interval(stable_hash(identity, seed_));
    const auto v = u < p ? Verdict::Pass : Verdict::Fail;
    return make_reply(call, format_marker_reply(label_or_default(call), v, "Scripted judgment."));
}

}  // namespace uq::gateway
