#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uq/composer/validator.hpp"
#include "uq/core/consensus.hpp"
#include "uq/core/json.hpp"
#include "uq/eval/metrics.hpp"
#include "uq/gateway/ledger.hpp"

namespace uq::eval {

using composer::VerdictTrace;

// One validator's verdict on one answer, joined with its label if known.
struct Judged {
    std::string validator_id;
    std::string question_id;
    std::string answer_id;
    std::string answer_model;
    std::optional<Verdict> verdict;  // empty when the trace ended in an error
    std::optional<GroundTruth> truth;
    std::int64_t judge_calls = 0;
    std::int64_t aux_calls = 0;
    gateway::LedgerEntry cost;
};

using Labels = std::map<std::string, GroundTruth>;  // by answer id

Labels labels_of(const std::vector<LabeledPair>& pairs);
std::vector<Judged> join_labels(const std::vector<VerdictTrace>& traces, const Labels& labels);

struct ValidatorScore {
    std::string validator_id;
    std::int64_t pairs = 0;
    std::int64_t errors = 0;  // traces without a verdict; not scored
    ConfusionCounts counts;
    Metrics metrics;
    std::int64_t judge_calls = 0;
    std::int64_t aux_calls = 0;
    gateway::LedgerEntry cost;

    double mean_calls() const;  // judging plus auxiliary calls per pair
};

// One score per validator id, in order of first appearance. Throws
// Error(InvalidInput) for verdicts without a label and Error(EmptyDataset)
// when a validator has nothing scorable.
std::vector<ValidatorScore> score(const std::vector<Judged>& records);

struct BiasEntry {
    std::string validator_id;
    std::string answer_model_id;
    std::int64_t n = 0;
    double predicted_accuracy = 0.0;  // fraction passed
    double gt_accuracy = 0.0;         // fraction labeled correct
    double bias = 0.0;                // predicted − gt
};

// Row-major: answer models sorted by id, validators sorted by id within a row.
std::vector<BiasEntry> bias_matrix(const std::vector<Judged>& records);

struct GapEntry {
    std::string model;
    std::optional<double> answer_accuracy;
    std::optional<double> validation_accuracy;  // pooled over the answers judged
    std::map<std::string, double> validation_by_answer_model;
    std::optional<double> gap;  // validation − answer accuracy
};

// Validator ids are taken to be judge model ids. Pairs a model judged about
// its own answers are left out unless `include_self`.
std::vector<GapEntry> gv_gap(const std::vector<Judged>& records, bool include_self = false);

struct RankRow {
    std::string model;
    std::vector<std::optional<int>> ranks;  // per validator; empty if the model was not judged
    std::optional<int> gt_rank;
};

struct RankTable {
    std::vector<std::string> validators;
    std::vector<RankRow> rows;  // sorted by model id
};

// Ranks answer models under each validator; the ground-truth column ranks by
// labeled accuracy when every record carries a label.
RankTable rank_trajectories(const std::vector<Judged>& records);

struct PassRateRow {
    std::string model;
    std::int64_t passed = 0;
    std::int64_t total = 0;
    std::int64_t errors = 0;
    std::optional<std::int64_t> diamond_passed;
    std::optional<std::int64_t> diamond_total;

    double percent() const;
};

struct PassRateReport {
    std::vector<PassRateRow> rows;  // sorted by model id
    std::int64_t union_passed = 0;   // distinct questions passed by any model
    std::int64_t union_total = 0;    // distinct questions judged
    std::optional<std::int64_t> union_diamond_passed;
};

PassRateReport pass_rate_report(const std::vector<VerdictTrace>& traces,
                                const std::set<std::string>* diamond_questions = nullptr);

struct VerificationRow {
    std::string model;
    std::int64_t passed = 0;
    std::int64_t verified_correct = 0;
    std::int64_t verified_total = 0;  // passed answers with a review consensus
};

// Counts, per model, validator-passed answers whose review consensus is
// Correct among those that have any consensus at all.
std::vector<VerificationRow> human_verification_report(const std::vector<VerdictTrace>& traces,
                                                       const std::vector<ReviewRecord>& reviews,
                                                       const ConsensusRule& rule = {});

struct Agreement {
    std::int64_t n = 0;
    std::optional<double> kappa;
};

// Pairs each answer's validator verdict with its review consensus (Correct →
// Pass, Incorrect → Fail); answers without a decisive consensus are skipped.
Agreement human_agreement(const std::vector<VerdictTrace>& traces,
                          const std::vector<ReviewRecord>& reviews, const ConsensusRule& rule = {});

struct ScalingPoint {
    std::string validator_id;
    double mean_calls = 0.0;
    double accuracy = 0.0;
};

// Throws Error(InvalidInput) with fewer than two validators.
std::vector<ScalingPoint> scaling_curve(const std::vector<ValidatorScore>& scores);

void to_json(json& j, const ValidatorScore& s);
void to_json(json& j, const BiasEntry& b);
void to_json(json& j, const GapEntry& g);
void to_json(json& j, const PassRateRow& r);
void to_json(json& j, const VerificationRow& r);
void to_json(json& j, const ScalingPoint& p);

}  // namespace uq::eval
