#include "uq/service/store.hpp"

#include <algorithm>
#include <mutex>

#include <fmt/format.h>

#include "uq/core/error.hpp"
#include "uq/core/fingerprint.hpp"
#include "uq/core/jsonl.hpp"
#include "uq/core/validate.hpp"

namespace uq::service {

namespace {

int status_order(Status s) {
    switch (s) {
        case Status::Resolved: return 0;
        case Status::HumanVerified: return 1;
        case Status::ValidatorPassed: return 2;
        case Status::Open: return 3;
    }
    return 3;
}

Timestamp now_utc() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

}  // namespace

std::string_view to_string(Status s) noexcept {
    switch (s) {
        case Status::Open: return "open";
        case Status::ValidatorPassed: return "validator_passed";
        case Status::HumanVerified: return "human_verified";
        case Status::Resolved: return "resolved";
    }
    return "open";
}

Status parse_status(std::string_view s) {
    for (auto st : {Status::Open, Status::ValidatorPassed, Status::HumanVerified, Status::Resolved}) {
        if (to_string(st) == s) return st;
    }
    throw Error(Errc::InvalidInput, fmt::format("unknown status '{}'", s));
}

ResolutionStatus derive_status(const std::string& question_id, const std::vector<AnswerOutcome>& answers) {
    ResolutionStatus out{question_id, Status::Open, std::nullopt};
    bool passed = false, disputed = false;
    for (const auto& a : answers) {
        if (!a.passed) continue;
        passed = true;
        if (a.consensus == Consensus::Correct) {
            out.status = Status::Resolved;
            out.resolved_by_model = a.model_id;
            return out;
        }
        disputed = disputed || a.consensus == Consensus::Disputed;
    }
    if (disputed) out.status = Status::HumanVerified;
    else if (passed) out.status = Status::ValidatorPassed;
    return out;
}

void sort_ranking(std::vector<RankingEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const RankingEntry& a, const RankingEntry& b) {
        if (a.verified_resolved != b.verified_resolved) return a.verified_resolved > b.verified_resolved;
        if (a.validator_passed != b.validator_passed) return a.validator_passed > b.validator_passed;
        return a.model_id < b.model_id;
    });
}

ReviewStore::ReviewStore(std::optional<std::filesystem::path> dir, StoreOptions options)
    : dir_(std::move(dir)), options_(options) {
    if (!dir_) return;
    std::filesystem::create_directories(*dir_);
    load();
    const auto log_path = *dir_ / "events.jsonl";
    const bool fresh = !std::filesystem::exists(log_path) || std::filesystem::file_size(log_path) == 0;
    log_.open(log_path, std::ios::app | std::ios::binary);
    if (!log_) throw Error(Errc::Io, fmt::format("cannot open {}", log_path.string()));
    if (fresh) {
        log_ << make_header("events").dump() << '\n';
        log_.flush();
    }
}

void ReviewStore::load() {
    const auto snap = *dir_ / "snapshot.json";
    if (std::filesystem::exists(snap)) {
        const auto j = json::parse(read_file(snap));
        seq_ = j.at("seq").get<std::int64_t>();
        for (const auto& q : j.at("questions")) apply("question_put", json{{"question", q}});
        for (const auto& a : j.at("answers")) {
            apply("answer_submitted", json{{"answer", a.at("answer")}, {"prompt", a.at("prompt")}});
            if (a.contains("trace") && !a.at("trace").is_null()) {
                apply("trace_attached", json{{"answer_id", a.at("answer").at("answer_id")}, {"trace", a.at("trace")}});
            }
        }
        for (const auto& r : j.at("reviews")) {
            apply("review_submitted", json{{"review_id", r.at("review_id")}, {"review", r.at("review")}});
            if (r.value("revoked", false)) apply("review_revoked", json{{"review_id", r.at("review_id")}});
        }
        for (const auto& [key, resp] : j.at("idempotency").items()) {
            apply("idempotency", json{{"key", key}, {"status", resp.at("status")}, {"body", resp.at("body")}});
        }
    }
    const auto log_path = *dir_ / "events.jsonl";
    if (!std::filesystem::exists(log_path)) return;
    std::ifstream in(log_path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json e;
        try {
            e = json::parse(line);
        } catch (const json::exception&) {
            break;  // a torn final write; everything before it is intact
        }
        if (e.contains("schema")) continue;
        const auto seq = e.at("seq").get<std::int64_t>();
        if (seq <= seq_) continue;
        apply(e.at("type").get<std::string>(), e.at("data"));
        seq_ = seq;
    }
}

void ReviewStore::commit(const std::string& type, json data) {
    ++seq_;
    if (dir_) {
        const json e{{"seq", seq_}, {"type", type}, {"data", data}};
        log_ << e.dump() << '\n';
        log_.flush();
        if (!log_) throw Error(Errc::Io, "failed to append to the event log");
    }
    apply(type, data);
    if (dir_ && options_.snapshot_every > 0 && seq_ % options_.snapshot_every == 0) write_snapshot();
}

void ReviewStore::apply(const std::string& type, const json& d) {
    if (type == "question_put") {
        auto q = d.at("question").get<QuestionRecord>();
        questions_[q.id] = std::move(q);
    } else if (type == "answer_submitted") {
        StoredAnswer a;
        a.answer = d.at("answer").get<CandidateAnswer>();
        a.prompt = d.at("prompt").get<std::string>();
        const auto id = a.answer.answer_id;
        fingerprints_.insert(a.answer.prompt_fingerprint);
        answers_by_question_[a.answer.question_id].push_back(id);
        answers_[id] = std::move(a);
    } else if (type == "trace_attached") {
        answers_.at(d.at("answer_id").get<std::string>()).trace = d.at("trace").get<composer::VerdictTrace>();
    } else if (type == "review_submitted") {
        StoredReview r;
        r.review_id = d.at("review_id").get<std::string>();
        r.review = d.at("review").get<ReviewRecord>();
        reviews_by_answer_[r.review.answer_id].push_back(r.review_id);
        reviews_[r.review_id] = std::move(r);
    } else if (type == "review_revoked") {
        reviews_.at(d.at("review_id").get<std::string>()).revoked = true;
    } else if (type == "idempotency") {
        idempotency_[d.at("key").get<std::string>()] =
            IdempotentResponse{d.at("status").get<int>(), d.at("body").get<std::string>()};
    } else {
        throw Error(Errc::InvalidInput, fmt::format("unknown event type '{}'", type));
    }
}

json ReviewStore::snapshot_json() const {
    json questions = json::array(), answers = json::array(), reviews = json::array(),
         idem = json::object();
    for (const auto& [id, q] : questions_) questions.push_back(q);
    for (const auto& [qid, ids] : answers_by_question_) {
        for (const auto& id : ids) {
            const auto& a = answers_.at(id);
            answers.push_back(json{{"answer", a.answer},
                                   {"prompt", a.prompt},
                                   {"trace", a.trace ? json(*a.trace) : json(nullptr)}});
        }
    }
    for (const auto& [aid, ids] : reviews_by_answer_) {
        for (const auto& id : ids) {
            const auto& r = reviews_.at(id);
            reviews.push_back(json{{"review_id", r.review_id}, {"review", r.review}, {"revoked", r.revoked}});
        }
    }
    for (const auto& [k, v] : idempotency_) idem[k] = json{{"status", v.status}, {"body", v.body}};
    return json{{"seq", seq_},
                {"questions", questions},
                {"answers", answers},
                {"reviews", reviews},
                {"idempotency", idem}};
}

void ReviewStore::write_snapshot() { write_file_atomic(*dir_ / "snapshot.json", snapshot_json().dump()); }

std::string ReviewStore::answer_content_fingerprint(const CandidateAnswer& a, const std::string& prompt) const {
    return fingerprint(json{{"question_id", a.question_id},
                            {"model_id", a.model_id},
                            {"text", a.text},
                            {"prompt", prompt},
                            {"sampling", a.sampling}});
}

void ReviewStore::put_question(const QuestionRecord& q) {
    if (auto problems = validate_record(q); !problems.empty()) {
        throw Error(Errc::InvalidInput, fmt::format("question '{}': {}", q.id, problems.front()));
    }
    std::unique_lock lock(mutex_);
    if (auto it = questions_.find(q.id); it != questions_.end() && it->second == q) return;
    commit("question_put", json{{"question", q}});
}

std::string ReviewStore::submit_answer(CandidateAnswer answer, const std::string& prompt) {
    if (prompt.empty()) throw Error(Errc::InvalidInput, "the full prompt is required");
    if (answer.text.empty()) throw Error(Errc::InvalidInput, "answer text must be nonempty");
    if (answer.model_id.empty()) throw Error(Errc::InvalidInput, "model_id is required");
    std::unique_lock lock(mutex_);
    if (!questions_.count(answer.question_id)) {
        throw Error(Errc::UnknownQuestion, fmt::format("no question '{}'", answer.question_id));
    }
    const auto fp = answer_content_fingerprint(answer, prompt);
    if (fingerprints_.count(fp)) {
        throw Error(Errc::DuplicateAnswer, "an identical answer was already submitted");
    }
    if (answer.answer_id.empty()) answer.answer_id = "a-" + fp.substr(0, 16);
    if (answers_.count(answer.answer_id)) {
        throw Error(Errc::DuplicateAnswer, fmt::format("answer id '{}' is taken", answer.answer_id));
    }
    answer.prompt_fingerprint = fp;
    if (answer.created_at == Timestamp{}) answer.created_at = now_utc();
    const auto id = answer.answer_id;
    commit("answer_submitted", json{{"answer", answer}, {"prompt", prompt}});
    return id;
}

void ReviewStore::attach_trace(const std::string& answer_id, composer::VerdictTrace trace) {
    std::unique_lock lock(mutex_);
    auto it = answers_.find(answer_id);
    if (it == answers_.end()) throw Error(Errc::UnknownAnswer, fmt::format("no answer '{}'", answer_id));
    if (!trace.answer_id.empty() && trace.answer_id != answer_id) {
        throw Error(Errc::InvalidInput, "trace belongs to a different answer");
    }
    trace.answer_id = answer_id;
    trace.question_id = it->second.answer.question_id;
    trace.model_id = it->second.answer.model_id;
    commit("trace_attached", json{{"answer_id", answer_id}, {"trace", trace}});
}

std::pair<std::string, ResolutionStatus> ReviewStore::submit_review(ReviewRecord review) {
    if (review.confidence < 1 || review.confidence > 5) {
        throw Error(Errc::InvalidConfidence, "confidence must lie in [1,5]");
    }
    if (review.reviewer_id.empty()) throw Error(Errc::InvalidInput, "reviewer_id is required");
    std::unique_lock lock(mutex_);
    auto it = answers_.find(review.answer_id);
    if (it == answers_.end()) throw Error(Errc::UnknownAnswer, fmt::format("no answer '{}'", review.answer_id));
    if (review.created_at == Timestamp{}) review.created_at = now_utc();
    const auto id = fmt::format("r{}", seq_ + 1);
    commit("review_submitted", json{{"review_id", id}, {"review", review}});
    return {id, status_locked(it->second.answer.question_id)};
}

ResolutionStatus ReviewStore::revoke_review(const std::string& review_id) {
    std::unique_lock lock(mutex_);
    auto it = reviews_.find(review_id);
    if (it == reviews_.end()) throw Error(Errc::UnknownAnswer, fmt::format("no review '{}'", review_id));
    if (!it->second.revoked) commit("review_revoked", json{{"review_id", review_id}});
    return status_locked(answers_.at(it->second.review.answer_id).answer.question_id);
}

bool ReviewStore::has_question(const std::string& id) const {
    std::shared_lock lock(mutex_);
    return questions_.count(id) > 0;
}

Consensus ReviewStore::consensus_of(const std::string& answer_id) const {
    auto it = reviews_by_answer_.find(answer_id);
    if (it == reviews_by_answer_.end()) return Consensus::None;
    std::vector<ReviewRecord> active;
    for (const auto& id : it->second) {
        const auto& r = reviews_.at(id);
        if (!r.revoked) active.push_back(r.review);
    }
    return consensus(active, options_.consensus);
}

ResolutionStatus ReviewStore::status_locked(const std::string& question_id) const {
    std::vector<AnswerOutcome> outcomes;
    if (auto it = answers_by_question_.find(question_id); it != answers_by_question_.end()) {
        for (const auto& id : it->second) {
            const auto& a = answers_.at(id);
            outcomes.push_back(AnswerOutcome{a.answer.model_id, a.trace && a.trace->final == Verdict::Pass,
                                             consensus_of(id)});
        }
    }
    return derive_status(question_id, outcomes);
}

ResolutionStatus ReviewStore::status(const std::string& question_id) const {
    std::shared_lock lock(mutex_);
    if (!questions_.count(question_id)) {
        throw Error(Errc::UnknownQuestion, fmt::format("no question '{}'", question_id));
    }
    return status_locked(question_id);
}

std::vector<QuestionSummary> ReviewStore::list_questions(const std::string& sort, const std::string& site,
                                                         std::optional<Status> status) const {
    if (!sort.empty() && sort != "votes" && sort != "status" && sort != "id") {
        throw Error(Errc::InvalidInput, fmt::format("unknown sort key '{}'", sort));
    }
    std::shared_lock lock(mutex_);
    std::vector<QuestionSummary> out;
    for (const auto& [id, q] : questions_) {
        if (!site.empty() && q.site != site) continue;
        const auto st = status_locked(id).status;
        if (status && st != *status) continue;
        const auto it = answers_by_question_.find(id);
        out.push_back(QuestionSummary{id, q.title, q.site, st, q.score,
                                      it == answers_by_question_.end() ? 0
                                                                       : static_cast<std::int64_t>(it->second.size()),
                                      q.diamond});
    }
    if (sort == "votes") {
        std::stable_sort(out.begin(), out.end(),
                         [](const QuestionSummary& a, const QuestionSummary& b) { return a.votes > b.votes; });
    } else if (sort == "status") {
        std::stable_sort(out.begin(), out.end(), [](const QuestionSummary& a, const QuestionSummary& b) {
            if (a.status != b.status) return status_order(a.status) < status_order(b.status);
            return a.votes > b.votes;
        });
    }
    return out;
}

json ReviewStore::answer_json(const std::string& aid) const {
    const auto& a = answers_.at(aid);
    json reviews = json::array();
    if (auto rit = reviews_by_answer_.find(aid); rit != reviews_by_answer_.end()) {
        for (const auto& rid : rit->second) {
            const auto& r = reviews_.at(rid);
            json rj = r.review;
            rj["review_id"] = r.review_id;
            rj["revoked"] = r.revoked;
            reviews.push_back(std::move(rj));
        }
    }
    return json{{"answer", a.answer},
                {"prompt", a.prompt},
                {"trace", a.trace ? json(*a.trace) : json(nullptr)},
                {"reviews", reviews},
                {"consensus", std::string(to_string(consensus_of(aid)))}};
}

json ReviewStore::question_detail(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto qit = questions_.find(id);
    if (qit == questions_.end()) throw Error(Errc::UnknownQuestion, fmt::format("no question '{}'", id));
    json answers = json::array();
    if (auto it = answers_by_question_.find(id); it != answers_by_question_.end()) {
        for (const auto& aid : it->second) answers.push_back(answer_json(aid));
    }
    return json{{"question", qit->second}, {"status", status_locked(id)}, {"answers", answers}};
}

json ReviewStore::answer_detail(const std::string& answer_id) const {
    std::shared_lock lock(mutex_);
    auto it = answers_.find(answer_id);
    if (it == answers_.end()) throw Error(Errc::UnknownAnswer, fmt::format("no answer '{}'", answer_id));
    auto j = answer_json(answer_id);
    j["question_id"] = it->second.answer.question_id;
    return j;
}

Stats ReviewStore::stats() const {
    std::shared_lock lock(mutex_);
    Stats s;
    s.questions = static_cast<std::int64_t>(questions_.size());
    s.answers = static_cast<std::int64_t>(answers_.size());
    std::set<std::string> models;
    for (const auto& [id, a] : answers_) models.insert(a.answer.model_id);
    s.unique_models = static_cast<std::int64_t>(models.size());
    for (const auto& [id, r] : reviews_) s.reviews += r.revoked ? 0 : 1;
    for (const auto& [id, q] : questions_) {
        const auto st = status_locked(id).status;
        s.open += st == Status::Open;
        s.resolved += st == Status::Resolved;
        s.human_verified += st == Status::HumanVerified;
        s.validator_passed += st != Status::Open;
    }
    return s;
}

std::vector<RankingEntry> ReviewStore::ranking() const {
    std::shared_lock lock(mutex_);
    std::map<std::string, std::set<std::string>> passed, verified;
    for (const auto& [id, a] : answers_) {
        const auto& m = a.answer.model_id;
        passed[m];
        verified[m];
        if (!(a.trace && a.trace->final == Verdict::Pass)) continue;
        passed[m].insert(a.answer.question_id);
        if (consensus_of(id) == Consensus::Correct) verified[m].insert(a.answer.question_id);
    }
    std::vector<RankingEntry> out;
    for (const auto& [m, qs] : passed) {
        out.push_back(RankingEntry{m, static_cast<std::int64_t>(verified[m].size()),
                                   static_cast<std::int64_t>(qs.size())});
    }
    sort_ranking(out);
    return out;
}

std::optional<IdempotentResponse> ReviewStore::idempotent(const std::string& key) const {
    std::shared_lock lock(mutex_);
    if (auto it = idempotency_.find(key); it != idempotency_.end()) return it->second;
    return std::nullopt;
}

void ReviewStore::remember(const std::string& key, const IdempotentResponse& response) {
    std::unique_lock lock(mutex_);
    if (idempotency_.count(key)) return;
    commit("idempotency", json{{"key", key}, {"status", response.status}, {"body", response.body}});
}

std::int64_t ReviewStore::last_seq() const {
    std::shared_lock lock(mutex_);
    return seq_;
}

void to_json(json& j, const ResolutionStatus& s) {
    j = json{{"question_id", s.question_id},
             {"status", std::string(to_string(s.status))},
             {"resolved_by_model", s.resolved_by_model ? json(*s.resolved_by_model) : json(nullptr)}};
}

void to_json(json& j, const RankingEntry& r) {
    j = json{{"model_id", r.model_id},
             {"verified_resolved", r.verified_resolved},
             {"validator_passed", r.validator_passed}};
}

void to_json(json& j, const Stats& s) {
    j = json{{"questions", s.questions},
             {"open", s.open},
             {"validator_passed", s.validator_passed},
             {"resolved", s.resolved},
             {"human_verified", s.human_verified},
             {"unique_models", s.unique_models},
             {"answers", s.answers},
             {"reviews", s.reviews}};
}

void to_json(json& j, const QuestionSummary& q) {
    j = json{{"id", q.id},
             {"title", q.title},
             {"site", q.site},
             {"status", std::string(to_string(q.status))},
             {"votes", q.votes},
             {"answer_count", q.answer_count},
             {"diamond", q.diamond}};
}

}  // namespace uq::service
