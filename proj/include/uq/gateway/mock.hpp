#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "uq/core/json.hpp"
#include "uq/core/types.hpp"
#include "uq/gateway/backend.hpp"

namespace uq::gateway {

// Formats a verdict reply the way the judging prompts request it.
std::string format_marker_reply(std::string_view label, Verdict v, std::string_view reasoning = {});

// Wraps a plain function; handy for hand-built scenarios in tests.
class LambdaBackend final : public Backend {
public:
    using Fn = std::function<std::string(const ModelCall&)>;
    explicit LambdaBackend(Fn fn) : fn_(std::move(fn)) {}
    ModelReply complete(const ModelCall& call) override;

private:
    Fn fn_;
};

// Rule-driven mock loaded from a JSON script:
//
//   {"seed": 7, "default": "Accepted: [[Y]]",
//    "rules": [{"check": "flc", "reply": "No Factual Errors: [[N]]"},
//              {"purpose": "infer", "reply": "What is the value of X?"},
//              {"contains": "Think twice", "replies": ["...", "..."]},
//              {"model": "o3", "pass_probability": 0.4}]}
//
// Match keys (all optional, all must hold): model, purpose, check, answer_id,
// question_id, sample, turn, contains (substring of any message). Actions:
// `reply`, `replies` (indexed by reflection turn, last entry repeats) or
// `pass_probability` (a Pass/Fail marker drawn as a pure function of the seed
// and the call). First matching rule wins.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(const json& script, std::optional<std::uint64_t> seed_override = {});
    static std::shared_ptr<ScriptedBackend> from_file(const std::string& path,
                                                      std::optional<std::uint64_t> seed = {});

    ModelReply complete(const ModelCall& call) override;

private:
    struct Rule {
        std::optional<std::string> model, purpose, check, answer_id, question_id, contains;
        std::optional<int> sample, turn;
        std::vector<std::string> replies;
        std::optional<double> pass_probability;
    };

    bool matches(const Rule& r, const ModelCall& call) const;
    std::string respond(const Rule& r, const ModelCall& call) const;

    std::vector<Rule> rules_;
    std::optional<std::string> default_reply_;
    std::uint64_t seed_ = 0;
};

// Hidden labels handed to scripted judges through a side channel keyed by
// answer id. Thread-safe.
class TruthTable {
public:
    void set(const std::string& answer_id, GroundTruth truth);
    std::optional<GroundTruth> get(const std::string& answer_id) const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, GroundTruth> truth_;
};

struct JudgeRates {
    double tpr = 1.0;  // P(Pass | answer correct)
    double fpr = 0.0;  // P(Pass | answer incorrect)
};

// A synthetic judge with fixed per-call rates. Each call's draw depends only on
// the seed, the answer, the step path, the sample index and the turn, so draws
// are independent across samples and reproducible regardless of scheduling.
// Answer-generation and question-inference calls get canned text.
class ScriptedJudge final : public Backend {
public:
    ScriptedJudge(JudgeRates rates, std::uint64_t seed, std::shared_ptr<const TruthTable> truth);

    // Rates used when judging answers produced by a specific model.
    void set_rates_for_answer_model(const std::string& answer_model, JudgeRates rates);

    ModelReply complete(const ModelCall& call) override;

private:
    JudgeRates rates_;
    std::map<std::string, JudgeRates> per_answer_model_;
    std::uint64_t seed_;
    std::shared_ptr<const TruthTable> truth_;
};

}  // namespace uq::gateway
