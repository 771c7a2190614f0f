#include "uq/core/json.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "uq/core/error.hpp"
#include "uq/core/time.hpp"

namespace uq {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
        out = it->get<T>();
    } else {
        out.reset();
    }
}

Timestamp read_time(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return Timestamp{};
    }
    if (it->is_number_integer()) {
        return from_unix(it->get<std::int64_t>());
    }
    return parse_rfc3339(it->get<std::string>());
}

}  // namespace

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::Crawled: return "crawled";
        case Provenance::Imported: return "imported";
        case Provenance::Synthetic: return "synthetic";
    }
    return "imported";
}

std::string_view to_string(Verdict v) noexcept { return v == Verdict::Pass ? "pass" : "fail"; }

std::string_view to_string(GroundTruth g) noexcept {
    return g == GroundTruth::Correct ? "correct" : "incorrect";
}

std::string_view to_string(Correctness c) noexcept {
    switch (c) {
        case Correctness::Correct: return "correct";
        case Correctness::Incorrect: return "incorrect";
        case Correctness::Unsure: return "unsure";
    }
    return "unsure";
}

Verdict parse_verdict_name(std::string_view s) {
    const auto l = lower(s);
    if (l == "pass" || l == "y") return Verdict::Pass;
    if (l == "fail" || l == "n") return Verdict::Fail;
    throw Error(Errc::InvalidInput, fmt::format("unknown verdict '{}'", s));
}

GroundTruth parse_ground_truth_name(std::string_view s) {
    const auto l = lower(s);
    if (l == "correct" || l == "true") return GroundTruth::Correct;
    if (l == "incorrect" || l == "false") return GroundTruth::Incorrect;
    throw Error(Errc::InvalidInput, fmt::format("unknown ground truth '{}'", s));
}

Correctness parse_correctness_name(std::string_view s) {
    const auto l = lower(s);
    if (l == "correct") return Correctness::Correct;
    if (l == "incorrect") return Correctness::Incorrect;
    if (l == "unsure") return Correctness::Unsure;
    throw Error(Errc::InvalidInput, fmt::format("unknown correctness '{}'", s));
}

Provenance parse_provenance_name(std::string_view s) {
    const auto l = lower(s);
    if (l == "crawled") return Provenance::Crawled;
    if (l == "imported") return Provenance::Imported;
    if (l == "synthetic") return Provenance::Synthetic;
    throw Error(Errc::InvalidInput, fmt::format("unknown provenance '{}'", s));
}

void to_json(json& j, Verdict v) { j = std::string(to_string(v)); }
void from_json(const json& j, Verdict& v) { v = parse_verdict_name(j.get<std::string>()); }

void to_json(json& j, GroundTruth g) { j = std::string(to_string(g)); }
void from_json(const json& j, GroundTruth& g) {
    if (j.is_boolean()) {
        g = j.get<bool>() ? GroundTruth::Correct : GroundTruth::Incorrect;
        return;
    }
    g = parse_ground_truth_name(j.get<std::string>());
}

void to_json(json& j, Correctness c) { j = std::string(to_string(c)); }
void from_json(const json& j, Correctness& c) { c = parse_correctness_name(j.get<std::string>()); }

void to_json(json& j, const QuestionRecord& q) {
    j = json{{"id", q.id},
             {"site", q.site},
             {"title", q.title},
             {"body", q.body},
             {"tags", q.tags},
             {"created_at", format_rfc3339(q.created_at)},
             {"views", q.views},
             {"score", q.score},
             {"answer_count", q.answer_count},
             {"comments", q.comments},
             {"diamond", q.diamond},
             {"provenance", std::string(to_string(q.provenance))}};
    if (q.category) j["category"] = *q.category;
    if (q.answer_type) j["answer_type"] = *q.answer_type;
}

void from_json(const json& j, QuestionRecord& q) {
    q.id = j.at("id").get<std::string>();
    q.site = j.value("site", std::string{});
    q.title = j.value("title", std::string{});
    q.body = j.value("body", std::string{});
    q.tags = j.value("tags", std::vector<std::string>{});
    q.created_at = read_time(j, "created_at");
    q.views = j.value("views", std::int64_t{0});
    q.score = j.value("score", std::int64_t{0});
    q.answer_count = j.value("answer_count", std::int64_t{0});
    q.comments = j.value("comments", std::vector<std::string>{});
    q.diamond = j.value("diamond", false);
    q.provenance = parse_provenance_name(j.value("provenance", std::string{"imported"}));
    read_optional(j, "category", q.category);
    read_optional(j, "answer_type", q.answer_type);
}

void to_json(json& j, const Sampling& s) {
    j = json{{"temperature", s.temperature}};
    if (s.seed) j["seed"] = *s.seed;
}

void from_json(const json& j, Sampling& s) {
    s.temperature = j.value("temperature", 0.0);
    read_optional(j, "seed", s.seed);
}

void to_json(json& j, const CandidateAnswer& a) {
    j = json{{"question_id", a.question_id},
             {"answer_id", a.answer_id},
             {"model_id", a.model_id},
             {"text", a.text},
             {"prompt_fingerprint", a.prompt_fingerprint},
             {"sampling", a.sampling},
             {"created_at", format_rfc3339(a.created_at)}};
}

void from_json(const json& j, CandidateAnswer& a) {
    a.question_id = j.value("question_id", std::string{});
    a.answer_id = j.value("answer_id", std::string{});
    a.model_id = j.value("model_id", std::string{});
    a.text = j.value("text", std::string{});
    a.prompt_fingerprint = j.value("prompt_fingerprint", std::string{});
    a.sampling = j.contains("sampling") ? j.at("sampling").get<Sampling>() : Sampling{};
    a.created_at = read_time(j, "created_at");
}

void to_json(json& j, const LabeledPair& p) {
    j = json{{"question", p.question}, {"answer", p.answer}, {"ground_truth", p.ground_truth}};
}

void from_json(const json& j, LabeledPair& p) {
    p.question = j.at("question").get<QuestionRecord>();
    p.answer = j.at("answer").get<CandidateAnswer>();
    p.ground_truth = j.at("ground_truth").get<GroundTruth>();
}

void to_json(json& j, const ReviewRecord& r) {
    j = json{{"answer_id", r.answer_id},
             {"reviewer_id", r.reviewer_id},
             {"correctness", r.correctness},
             {"confidence", r.confidence},
             {"created_at", format_rfc3339(r.created_at)}};
    if (r.comment) j["comment"] = *r.comment;
}

void from_json(const json& j, ReviewRecord& r) {
    r.answer_id = j.at("answer_id").get<std::string>();
    r.reviewer_id = j.value("reviewer_id", std::string{});
    r.correctness = j.at("correctness").get<Correctness>();
    r.confidence = j.at("confidence").get<int>();
    read_optional(j, "comment", r.comment);
    r.created_at = read_time(j, "created_at");
}

}  // namespace uq
