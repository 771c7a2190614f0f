#include "uq/eval/analysis.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq::eval {

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

double frac(std::int64_t num, std::int64_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
}

std::map<std::string, std::vector<ReviewRecord>> reviews_by_answer(const std::vector<ReviewRecord>& reviews) {
    std::map<std::string, std::vector<ReviewRecord>> out;
    for (const auto& r : reviews) out[r.answer_id].push_back(r);
    return out;
}

}  // namespace

Labels labels_of(const std::vector<LabeledPair>& pairs) {
    Labels out;
    for (const auto& p : pairs) out[p.answer.answer_id] = p.ground_truth;
    return out;
}

std::vector<Judged> join_labels(const std::vector<VerdictTrace>& traces, const Labels& labels) {
    std::vector<Judged> out;
    out.reserve(traces.size());
    for (const auto& t : traces) {
        Judged j;
        j.validator_id = t.validator_id;
        j.question_id = t.question_id;
        j.answer_id = t.answer_id;
        j.answer_model = t.model_id;
        j.verdict = t.final;
        if (auto it = labels.find(t.answer_id); it != labels.end()) j.truth = it->second;
        j.judge_calls = t.judge_calls;
        j.aux_calls = t.aux_calls;
        j.cost = t.ledger;
        out.push_back(std::move(j));
    }
    return out;
}

double ValidatorScore::mean_calls() const {
    return pairs == 0 ? 0.0 : frac(judge_calls + aux_calls, pairs);
}

std::vector<ValidatorScore> score(const std::vector<Judged>& records) {
    std::vector<ValidatorScore> out;
    std::map<std::string, std::size_t> index;
    for (const auto& r : records) {
        auto [it, fresh] = index.emplace(r.validator_id, out.size());
        if (fresh) {
            out.emplace_back();
            out.back().validator_id = r.validator_id;
        }
        auto& s = out[it->second];
        ++s.pairs;
        s.judge_calls += r.judge_calls;
        s.aux_calls += r.aux_calls;
        s.cost += r.cost;
        if (!r.verdict) {
            ++s.errors;
            continue;
        }
        if (!r.truth) {
            throw Error(Errc::InvalidInput,
                        fmt::format("answer '{}' has no ground-truth label", r.answer_id));
        }
        s.counts.add(*r.truth, *r.verdict);
    }
    if (out.empty()) throw Error(Errc::EmptyDataset, "no judged pairs to score");
    for (auto& s : out) {
        if (s.counts.total() == 0) {
            throw Error(Errc::EmptyDataset,
                        fmt::format("validator '{}' has no scorable pairs", s.validator_id));
        }
        s.metrics = compute_metrics(s.counts);
    }
    return out;
}

std::vector<BiasEntry> bias_matrix(const std::vector<Judged>& records) {
    struct Cell {
        std::int64_t n = 0, passed = 0, correct = 0;
    };
    std::map<std::pair<std::string, std::string>, Cell> cells;  // (answer model, validator)
    for (const auto& r : records) {
        if (!r.verdict) continue;
        if (!r.truth) {
            throw Error(Errc::InvalidInput,
                        fmt::format("answer '{}' has no ground-truth label", r.answer_id));
        }
        auto& c = cells[{r.answer_model, r.validator_id}];
        ++c.n;
        c.passed += *r.verdict == Verdict::Pass;
        c.correct += *r.truth == GroundTruth::Correct;
    }
    if (cells.empty()) throw Error(Errc::EmptyDataset, "no judged pairs for the bias matrix");
    std::vector<BiasEntry> out;
    for (const auto& [key, c] : cells) {
        BiasEntry e;
        e.answer_model_id = key.first;
        e.validator_id = key.second;
        e.n = c.n;
        e.predicted_accuracy = frac(c.passed, c.n);
        e.gt_accuracy = frac(c.correct, c.n);
        e.bias = e.predicted_accuracy - e.gt_accuracy;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<GapEntry> gv_gap(const std::vector<Judged>& records, bool include_self) {
    std::map<std::string, std::map<std::string, GroundTruth>> answers;  // model -> answer id -> truth
    struct Tally {
        std::int64_t right = 0, n = 0;
    };
    std::map<std::string, std::map<std::string, Tally>> judging;  // judge -> answer model -> tally
    std::set<std::string> models;
    for (const auto& r : records) {
        models.insert(r.answer_model);
        models.insert(r.validator_id);
        if (r.truth) answers[r.answer_model][r.answer_id] = *r.truth;
        if (!r.verdict || !r.truth) continue;
        if (!include_self && r.validator_id == r.answer_model) continue;
        auto& t = judging[r.validator_id][r.answer_model];
        ++t.n;
        const bool right = (*r.verdict == Verdict::Pass) == (*r.truth == GroundTruth::Correct);
        t.right += right;
    }
    std::vector<GapEntry> out;
    for (const auto& m : models) {
        GapEntry g;
        g.model = m;
        if (auto it = answers.find(m); it != answers.end() && !it->second.empty()) {
            std::int64_t correct = 0;
            for (const auto& [id, truth] : it->second) correct += truth == GroundTruth::Correct;
            g.answer_accuracy = frac(correct, static_cast<std::int64_t>(it->second.size()));
        }
        if (auto it = judging.find(m); it != judging.end()) {
            Tally pooled;
            for (const auto& [am, t] : it->second) {
                g.validation_by_answer_model[am] = frac(t.right, t.n);
                pooled.right += t.right;
                pooled.n += t.n;
            }
            if (pooled.n > 0) g.validation_accuracy = frac(pooled.right, pooled.n);
        }
        if (g.answer_accuracy && g.validation_accuracy) {
            g.gap = *g.validation_accuracy - *g.answer_accuracy;
        }
        out.push_back(std::move(g));
    }
    return out;
}

RankTable rank_trajectories(const std::vector<Judged>& records) {
    RankTable table;
    std::map<std::string, std::map<std::string, ModelTally>> per_validator;
    std::map<std::string, std::map<std::string, GroundTruth>> truths;
    std::set<std::string> models;
    bool all_labeled = !records.empty();
    for (const auto& r : records) {
        models.insert(r.answer_model);
        if (r.truth) {
            truths[r.answer_model][r.answer_id] = *r.truth;
        } else {
            all_labeled = false;
        }
        if (!r.verdict) continue;
        auto& t = per_validator[r.validator_id][r.answer_model];
        t.model = r.answer_model;
        ++t.total;
        t.passed += *r.verdict == Verdict::Pass;
    }
    if (models.empty()) throw Error(Errc::EmptyDataset, "no judged pairs to rank");
    std::map<std::string, RankRow> rows;
    for (const auto& m : models) rows[m].model = m;
    for (const auto& [validator, tallies] : per_validator) {
        table.validators.push_back(validator);
        std::vector<ModelTally> list;
        for (const auto& [m, t] : tallies) list.push_back(t);
        std::map<std::string, int> rank_of;
        for (const auto& e : rank_models(list)) rank_of[e.model] = e.rank;
        for (auto& [m, row] : rows) {
            auto it = rank_of.find(m);
            row.ranks.push_back(it == rank_of.end() ? std::nullopt : std::optional<int>(it->second));
        }
    }
    if (all_labeled) {
        std::vector<ModelTally> list;
        for (const auto& [m, answers] : truths) {
            ModelTally t{m, 0, static_cast<std::int64_t>(answers.size())};
            for (const auto& [id, truth] : answers) t.passed += truth == GroundTruth::Correct;
            list.push_back(t);
        }
        for (const auto& e : rank_models(list)) rows[e.model].gt_rank = e.rank;
    }
    for (auto& [m, row] : rows) table.rows.push_back(std::move(row));
    return table;
}

double PassRateRow::percent() const { return total == 0 ? 0.0 : 100.0 * frac(passed, total); }

PassRateReport pass_rate_report(const std::vector<VerdictTrace>& traces,
                                const std::set<std::string>* diamond_questions) {
    std::map<std::string, PassRateRow> rows;
    std::set<std::string> judged, passed, diamond_passed;
    for (const auto& t : traces) {
        auto& row = rows[t.model_id];
        row.model = t.model_id;
        ++row.total;
        judged.insert(t.question_id);
        const bool pass = t.final == Verdict::Pass;
        if (!t.final) ++row.errors;
        if (pass) {
            ++row.passed;
            passed.insert(t.question_id);
        }
        if (diamond_questions) {
            if (!row.diamond_total) {
                row.diamond_total = 0;
                row.diamond_passed = 0;
            }
            if (diamond_questions->count(t.question_id)) {
                ++*row.diamond_total;
                if (pass) {
                    ++*row.diamond_passed;
                    diamond_passed.insert(t.question_id);
                }
            }
        }
    }
    PassRateReport report;
    for (auto& [m, row] : rows) report.rows.push_back(std::move(row));
    report.union_passed = static_cast<std::int64_t>(passed.size());
    report.union_total = static_cast<std::int64_t>(judged.size());
    if (diamond_questions) report.union_diamond_passed = static_cast<std::int64_t>(diamond_passed.size());
    return report;
}

std::vector<VerificationRow> human_verification_report(const std::vector<VerdictTrace>& traces,
                                                       const std::vector<ReviewRecord>& reviews,
                                                       const ConsensusRule& rule) {
    const auto by_answer = reviews_by_answer(reviews);
    std::map<std::string, VerificationRow> rows;
    for (const auto& t : traces) {
        auto& row = rows[t.model_id];
        row.model = t.model_id;
        if (t.final != Verdict::Pass) continue;
        ++row.passed;
        auto it = by_answer.find(t.answer_id);
        if (it == by_answer.end()) continue;
        const auto c = consensus(it->second, rule);
        if (c == Consensus::None) continue;
        ++row.verified_total;
        row.verified_correct += c == Consensus::Correct;
    }
    std::vector<VerificationRow> out;
    for (auto& [m, row] : rows) out.push_back(std::move(row));
    return out;
}

Agreement human_agreement(const std::vector<VerdictTrace>& traces,
                          const std::vector<ReviewRecord>& reviews, const ConsensusRule& rule) {
    const auto by_answer = reviews_by_answer(reviews);
    std::vector<Verdict> human, validator;
    for (const auto& t : traces) {
        if (!t.final) continue;
        auto it = by_answer.find(t.answer_id);
        if (it == by_answer.end()) continue;
        const auto c = consensus(it->second, rule);
        if (c != Consensus::Correct && c != Consensus::Incorrect) continue;
        human.push_back(c == Consensus::Correct ? Verdict::Pass : Verdict::Fail);
        validator.push_back(*t.final);
    }
    return Agreement{static_cast<std::int64_t>(human.size()), cohen_kappa(human, validator)};
}

std::vector<ScalingPoint> scaling_curve(const std::vector<ValidatorScore>& scores) {
    if (scores.size() < 2) {
        throw Error(Errc::InvalidInput, "a scaling curve needs at least two validators");
    }
    std::vector<ScalingPoint> out;
    for (const auto& s : scores) out.push_back(ScalingPoint{s.validator_id, s.mean_calls(), s.metrics.accuracy});
    return out;
}

void to_json(json& j, const ValidatorScore& s) {
    j = json{{"validator_id", s.validator_id},
             {"pairs", s.pairs},
             {"errors", s.errors},
             {"counts", s.counts},
             {"accuracy", s.metrics.accuracy},
             {"precision", opt(s.metrics.precision)},
             {"recall", opt(s.metrics.recall)},
             {"judge_calls", s.judge_calls},
             {"aux_calls", s.aux_calls},
             {"mean_calls", s.mean_calls()},
             {"cost", s.cost}};
}

void to_json(json& j, const BiasEntry& b) {
    j = json{{"validator_id", b.validator_id},
             {"answer_model_id", b.answer_model_id},
             {"n", b.n},
             {"predicted_accuracy", b.predicted_accuracy},
             {"gt_accuracy", b.gt_accuracy},
             {"bias", b.bias}};
}

void to_json(json& j, const GapEntry& g) {
    j = json{{"model", g.model},
             {"answer_accuracy", opt(g.answer_accuracy)},
             {"validation_accuracy", opt(g.validation_accuracy)},
             {"validation_by_answer_model", g.validation_by_answer_model},
             {"gap", opt(g.gap)}};
}

void to_json(json& j, const PassRateRow& r) {
    j = json{{"model", r.model},
             {"passed", r.passed},
             {"total", r.total},
             {"percent", r.percent()},
             {"errors", r.errors}};
    if (r.diamond_total) {
        j["diamond_passed"] = *r.diamond_passed;
        j["diamond_total"] = *r.diamond_total;
    }
}

void to_json(json& j, const VerificationRow& r) {
    j = json{{"model", r.model},
             {"passed", r.passed},
             {"verified_correct", r.verified_correct},
             {"verified_total", r.verified_total}};
}

void to_json(json& j, const ScalingPoint& p) {
    j = json{{"validator_id", p.validator_id}, {"mean_calls", p.mean_calls}, {"accuracy", p.accuracy}};
}

}  // namespace uq::eval
