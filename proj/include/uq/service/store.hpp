#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "uq/composer/validator.hpp"
#include "uq/core/consensus.hpp"
#include "uq/core/json.hpp"
#include "uq/core/types.hpp"

namespace uq::service {

enum class Status { Open, ValidatorPassed, HumanVerified, Resolved };

std::string_view to_string(Status s) noexcept;
Status parse_status(std::string_view s);

struct ResolutionStatus {
    std::string question_id;
    Status status = Status::Open;
    std::optional<std::string> resolved_by_model;
};

struct RankingEntry {
    std::string model_id;
    std::int64_t verified_resolved = 0;  // distinct questions
    std::int64_t validator_passed = 0;   // distinct questions

    bool operator==(const RankingEntry&) const = default;
};

struct Stats {
    std::int64_t questions = 0;
    std::int64_t open = 0;
    std::int64_t validator_passed = 0;  // questions with at least one passing answer
    std::int64_t resolved = 0;
    std::int64_t human_verified = 0;    // disputed, nothing resolved
    std::int64_t unique_models = 0;
    std::int64_t answers = 0;
    std::int64_t reviews = 0;           // active (not revoked)

    bool operator==(const Stats&) const = default;
};

struct StoredAnswer {
    CandidateAnswer answer;
    std::string prompt;
    std::optional<composer::VerdictTrace> trace;
};

struct StoredReview {
    std::string review_id;
    ReviewRecord review;
    bool revoked = false;
};

// What status derivation needs to know about one answer.
struct AnswerOutcome {
    std::string model_id;
    bool passed = false;
    Consensus consensus = Consensus::None;
};

// Resolved: some passing answer has a Correct consensus. HumanVerified: not
// resolved, but a passing answer's reviews conflict. ValidatorPassed: some
// answer passed. Open otherwise. Incorrect consensus leaves a passing answer
// at ValidatorPassed.
ResolutionStatus derive_status(const std::string& question_id, const std::vector<AnswerOutcome>& answers);

// Verified first, then passed, then model id.
void sort_ranking(std::vector<RankingEntry>& entries);

struct QuestionSummary {
    std::string id;
    std::string title;
    std::string site;
    Status status = Status::Open;
    std::int64_t votes = 0;
    std::int64_t answer_count = 0;  // candidate answers submitted here
    bool diamond = false;
};

struct StoreOptions {
    ConsensusRule consensus;
    int snapshot_every = 100;  // events between snapshots; 0 disables them
};

struct IdempotentResponse {
    int status = 200;
    std::string body;
};

// Questions, candidate answers, traces and reviews. Every write is appended
// to `events.jsonl` before it is applied; `snapshot.json` is rewritten every
// `snapshot_every` events. Opening a directory replays the snapshot and any
// later events. Without a directory the store lives in memory.
class ReviewStore {
public:
    explicit ReviewStore(std::optional<std::filesystem::path> dir = {}, StoreOptions options = {});

    // Inserts or replaces a question.
    void put_question(const QuestionRecord& q);
    // Returns the stored answer id. Throws UnknownQuestion, InvalidInput
    // (empty prompt or text) or DuplicateAnswer.
    std::string submit_answer(CandidateAnswer answer, const std::string& prompt);
    // Throws UnknownAnswer.
    void attach_trace(const std::string& answer_id, composer::VerdictTrace trace);
    // Returns the new review id and the question's status afterwards. Throws
    // UnknownAnswer or InvalidConfidence.
    std::pair<std::string, ResolutionStatus> submit_review(ReviewRecord review);
    // Throws UnknownAnswer for an unknown review id.
    ResolutionStatus revoke_review(const std::string& review_id);

    bool has_question(const std::string& id) const;
    ResolutionStatus status(const std::string& question_id) const;
    std::vector<QuestionSummary> list_questions(const std::string& sort = {}, const std::string& site = {},
                                                std::optional<Status> status = {}) const;
    // Question, status, and per answer: answer, prompt, trace, reviews,
    // consensus. Throws UnknownQuestion.
    json question_detail(const std::string& id) const;
    // One entry of question_detail's `answers` plus `question_id`. Throws
    // UnknownAnswer.
    json answer_detail(const std::string& answer_id) const;
    Stats stats() const;
    std::vector<RankingEntry> ranking() const;

    std::optional<IdempotentResponse> idempotent(const std::string& key) const;
    void remember(const std::string& key, const IdempotentResponse& response);

    std::int64_t last_seq() const;

private:
    void commit(const std::string& type, json data);
    void apply(const std::string& type, const json& data);
    void write_snapshot();
    void load();
    json snapshot_json() const;
    Consensus consensus_of(const std::string& answer_id) const;
    json answer_json(const std::string& answer_id) const;
    ResolutionStatus status_locked(const std::string& question_id) const;
    std::string answer_content_fingerprint(const CandidateAnswer& a, const std::string& prompt) const;

    std::optional<std::filesystem::path> dir_;
    StoreOptions options_;
    mutable std::shared_mutex mutex_;
    std::ofstream log_;
    std::int64_t seq_ = 0;

    std::map<std::string, QuestionRecord> questions_;
    std::map<std::string, StoredAnswer> answers_;
    std::map<std::string, std::vector<std::string>> answers_by_question_;  // submission order
    std::set<std::string> fingerprints_;
    std::map<std::string, StoredReview> reviews_;
    std::map<std::string, std::vector<std::string>> reviews_by_answer_;
    std::map<std::string, IdempotentResponse> idempotency_;
};

void to_json(json& j, const ResolutionStatus& s);
void to_json(json& j, const RankingEntry& r);
void to_json(json& j, const Stats& s);
void to_json(json& j, const QuestionSummary& q);

}  // namespace uq::service
