#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uq {

using Timestamp = std::chrono::sys_seconds;

enum class Provenance { Crawled, Imported, Synthetic };

enum class Verdict { Pass, Fail };

enum class GroundTruth { Correct, Incorrect };

enum class Correctness { Correct, Incorrect, Unsure };

std::string_view to_string(Provenance p) noexcept;
std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(GroundTruth g) noexcept;
std::string_view to_string(Correctness c) noexcept;

/// A question as crawled from a Q&A site or imported from a labeled benchmark.
///
/// `id` follows the `<site>:<numeric-id>` convention for crawled records.
/// `category` and `answer_type` are optional metadata: the former feeds the
/// `{Category}` prompt slot, the latter lets surrogate-set loaders drop
/// multiple-choice items.
struct QuestionRecord {
    std::string id;
    std::string site;
    std::string title;
    std::string body;
    std::vector<std::string> tags;
    Timestamp created_at{};
    std::int64_t views = 0;
    std::int64_t score = 0;
    std::int64_t answer_count = 0;
    std::vector<std::string> comments;
    bool diamond = false;
    Provenance provenance = Provenance::Imported;
    std::optional<std::string> category;
    std::optional<std::string> answer_type;

    bool operator==(const QuestionRecord&) const = default;
};

struct Sampling {
    double temperature = 0.0;
    std::optional<std::int64_t> seed;

    bool operator==(const Sampling&) const = default;
};

struct CandidateAnswer {
    std::string question_id;
    std::string answer_id;
    std::string model_id;
    std::string text;
    std::string prompt_fingerprint;
    Sampling sampling;
    Timestamp created_at{};

    bool operator==(const CandidateAnswer&) const = default;
};

struct LabeledPair {
    QuestionRecord question;
    CandidateAnswer answer;
    GroundTruth ground_truth = GroundTruth::Incorrect;

    bool operator==(const LabeledPair&) const = default;
};

struct ReviewRecord {
    std::string answer_id;
    std::string reviewer_id;
    Correctness correctness = Correctness::Unsure;
    int confidence = 1;
    std::optional<std::string> comment;
    Timestamp created_at{};

    bool operator==(const ReviewRecord&) const = default;
};

inline bool is_multiple_choice(const QuestionRecord& q) {
    return q.answer_type && (*q.answer_type == "multipleChoice" ||
                             *q.answer_type == "multiple_choice");
}

}  // namespace uq
