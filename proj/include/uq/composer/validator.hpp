#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uq/composer/spec.hpp"
#include "uq/core/json.hpp"
#include "uq/gateway/ledger.hpp"
#include "uq/strategy/judge.hpp"

namespace uq::composer {

// Majority: Pass iff strictly more than half pass (an even split fails).
// Unanimous: Pass iff every verdict passes. Throws Error(EmptyVote).
Verdict aggregate(VoteRule rule, const std::vector<Verdict>& verdicts);

struct ValidatorOptions {
    // Unanimous votes stop at the first Fail; majority votes stop once decided.
    bool short_circuit = true;
    // Keeps majority votes running to the end so every ballot is recorded.
    bool full_traces = false;
    // Off for bulk simulation, where only verdicts and counts matter.
    bool keep_transcripts = true;
};

struct StageOutcome {
    std::string path;  // step path of the pipeline node
    int stage = 1;     // 1-based
    std::vector<Verdict> verdicts;
    Verdict aggregated = Verdict::Fail;
    bool short_circuited = false;
};

struct VerdictTrace {
    std::string question_id;
    std::string answer_id;
    std::string model_id;  // model that produced the answer
    std::string validator_id;
    std::string spec;      // canonical strategy text
    std::optional<Verdict> final;
    std::vector<StageOutcome> stage_outcomes;
    std::vector<strategy::JudgmentStep> steps;
    gateway::LedgerEntry ledger;  // sum of step costs
    int judge_calls = 0;
    int aux_calls = 0;
    std::optional<int> fail_stage;  // set for pipeline roots that fail
    std::optional<std::string> error;
    std::optional<std::string> error_code;
};

void to_json(json& j, const StageOutcome& s);
void from_json(const json& j, StageOutcome& s);
void to_json(json& j, const VerdictTrace& t);
void from_json(const json& j, VerdictTrace& t);

class Validator {
public:
    Validator(strategy::CheckRunner& runner, SpecPtr spec, ValidatorOptions options = {},
              std::string validator_id = {});

    // Backend and parse failures end the evaluation early; the partial trace
    // carries the error instead of a final verdict.
    VerdictTrace run(const QuestionRecord& question, const CandidateAnswer& answer) const;

    const SpecPtr& spec() const { return spec_; }
    const std::string& id() const { return id_; }

private:
    strategy::CheckRunner& runner_;
    SpecPtr spec_;
    ValidatorOptions options_;
    std::string id_;
};

// Runs `validator` over all pairs with `workers` threads. Results keep the
// input order.
std::vector<VerdictTrace> run_batch(const Validator& validator,
                                    const std::vector<std::pair<QuestionRecord, CandidateAnswer>>& pairs,
                                    int workers);

// Verdict of the judging turn `turn` of the check at `step_path`.
using Scenario = std::function<Verdict(const std::string& step_path, int turn)>;

struct CallCount {
    int judge_calls = 0;
    int aux_calls = 0;  // question inference for cycle-consistency checks

    bool operator==(const CallCount&) const = default;
};

// Judge invocations `Validator::run` would issue if every judging turn
// returned the verdict the scenario assigns to it. Computed without a
// backend.
CallCount call_count(const StrategySpec& spec, const Scenario& scenario,
                     const ValidatorOptions& options = {});

}  // namespace uq::composer
