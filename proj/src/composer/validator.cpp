#include "uq/composer/validator.hpp"

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq::composer {

namespace {

using strategy::CheckRunner;
using strategy::JudgmentStep;

std::string child_path(const std::string& path, std::size_t i) { return fmt::format("{}.{}", path, i); }

// Ballots a node contributes when it is a direct child of a vote: one per
// judging turn for a check, one per sample for a repeat, one otherwise.
int ballot_count(const StrategySpec& s) {
    if (const auto* l = std::get_if<Leaf>(&s.node)) return l->reflect_depth + 1;
    if (const auto* r = std::get_if<Repeat>(&s.node)) return r->k;
    return 1;
}

int ballot_count(const std::vector<SpecPtr>& children) {
    int n = 0;
    for (const auto& c : children) n += ballot_count(*c);
    return n;
}

struct Tally {
    VoteRule rule = VoteRule::Unanimous;
    int total = 0;
    bool early = true;
    int passes = 0;
    int fails = 0;
    std::vector<Verdict> cast;

    Tally(VoteRule r, int n, const ValidatorOptions& o)
        : rule(r), total(n),
          early(r == VoteRule::Unanimous ? o.short_circuit : o.short_circuit && !o.full_traces) {}

    void add(Verdict v) {
        cast.push_back(v);
        (v == Verdict::Pass ? passes : fails) += 1;
    }

    bool decided() const {
        if (!early) return false;
        if (rule == VoteRule::Unanimous) return fails > 0;
        return 2 * passes > total || 2 * (total - fails) <= total;
    }

    bool cut_short() const { return static_cast<int>(cast.size()) < total; }
};

// Cycle-consistency inferences shared within one pipeline stage or ensemble
// member, keyed by judge model.
using InferScope = std::map<std::string, std::string>;

struct NodeResult {
    Verdict verdict = Verdict::Fail;
    std::vector<Verdict> ballots;
    bool short_circuited = false;
};

class Evaluator {
public:
    Evaluator(CheckRunner& runner, const ValidatorOptions& options, const QuestionRecord& q,
              const CandidateAnswer& a, VerdictTrace& trace)
        : runner_(runner), options_(options), q_(q), a_(a), trace_(trace) {}

    NodeResult root(const StrategySpec& spec) {
        InferScope scope;
        auto result = node(spec, "0", 0, scope, true);
        if (!std::holds_alternative<Pipeline>(spec.node)) {
            trace_.stage_outcomes.push_back(
                StageOutcome{"0", 1, result.ballots, result.verdict, result.short_circuited});
        }
        return result;
    }

private:
    Verdict run_leaf(const Leaf& l, const std::string& path, int attempt, InferScope& scope,
                     std::function<bool(Verdict)> stop, std::vector<Verdict>* turns) {
        strategy::CheckRequest req;
        req.check = l.check;
        req.judge_model = l.judge_model;
        req.reflect_depth = l.reflect_depth;
        req.sample_index = attempt;
        req.step_path = path;
        req.stop = std::move(stop);

        int aux = 0;
        gateway::LedgerEntry aux_cost;
        if (l.check == CheckKind::CycleConsistency) {
            auto it = scope.find(l.judge_model);
            if (it == scope.end()) {
                auto inf = runner_.infer_question(a_, l.judge_model, path);
                aux = 1;
                aux_cost = inf.cost;
                trace_.aux_calls += 1;
                trace_.ledger += aux_cost;
                it = scope.emplace(l.judge_model, std::move(inf.question)).first;
            }
            req.inferred_question = it->second;
        }
        JudgmentStep step = runner_.run_check(q_, a_, req);
        trace_.judge_calls += step.judge_calls;
        trace_.ledger += step.cost;
        // The inference was already charged to the trace above.
        step.aux_calls = aux;
        step.cost += aux_cost;
        const Verdict v = step.parsed;
        if (turns) *turns = step.turn_verdicts();
        if (!options_.keep_transcripts) {
            step.transcript.clear();
            for (auto& t : step.turns) t.delta.clear();
        }
        trace_.steps.push_back(std::move(step));
        return v;
    }

    // Casts the ballots of a vote child into `tally`.
    void cast(const StrategySpec& s, const std::string& path, int attempt, InferScope& scope,
              Tally& tally) {
        if (const auto* l = std::get_if<Leaf>(&s.node)) {
            Tally probe = tally;
            std::vector<Verdict> turns;
            run_leaf(*l, path, attempt, scope,
                     [&probe](Verdict v) {
                         probe.add(v);
                         return probe.decided();
                     },
                     &turns);
            for (auto v : turns) tally.add(v);
            return;
        }
        if (const auto* r = std::get_if<Repeat>(&s.node)) {
            for (int i = 0; i < r->k; ++i) {
                tally.add(node(*r->child, child_path(path, i), attempt * r->k + i, scope, false).verdict);
                if (tally.decided()) return;
            }
            return;
        }
        tally.add(node(s, path, attempt, scope, false).verdict);
    }

    NodeResult node(const StrategySpec& s, const std::string& path, int attempt, InferScope& scope,
                    bool is_root) {
        return std::visit(
            [&](const auto& n) -> NodeResult {
                using T = std::decay_t<decltype(n)>;
                NodeResult out;
                if constexpr (std::is_same_v<T, Leaf>) {
                    out.verdict = run_leaf(n, path, attempt, scope, nullptr, &out.ballots);
                } else if constexpr (std::is_same_v<T, Repeat>) {
                    Tally tally(VoteRule::Unanimous, n.k, options_);
                    for (int i = 0; i < n.k && !tally.decided(); ++i) {
                        tally.add(node(*n.child, child_path(path, i), attempt * n.k + i, scope, false).verdict);
                    }
                    out.ballots = tally.cast;
                    out.verdict = aggregate(VoteRule::Unanimous, tally.cast);
                    out.short_circuited = tally.cut_short();
                } else if constexpr (std::is_same_v<T, Vote>) {
                    Tally tally(n.rule, ballot_count(n.children), options_);
                    for (std::size_t i = 0; i < n.children.size() && !tally.decided(); ++i) {
                        cast(*n.children[i], child_path(path, i), attempt, scope, tally);
                    }
                    out.ballots = tally.cast;
                    out.verdict = aggregate(n.rule, tally.cast);
                    out.short_circuited = tally.cut_short();
                } else if constexpr (std::is_same_v<T, Pipeline>) {
                    out.verdict = Verdict::Pass;
                    for (std::size_t i = 0; i < n.stages.size(); ++i) {
                        InferScope stage_scope;
                        auto r = node(*n.stages[i], child_path(path, i), attempt, stage_scope, false);
                        const int stage = static_cast<int>(i) + 1;
                        trace_.stage_outcomes.push_back(
                            StageOutcome{path, stage, r.ballots, r.verdict, r.short_circuited});
                        out.ballots.push_back(r.verdict);
                        if (r.verdict == Verdict::Fail) {
                            out.verdict = Verdict::Fail;
                            out.short_circuited = i + 1 < n.stages.size();
                            if (is_root) trace_.fail_stage = stage;
                            break;
                        }
                    }
                } else {
                    Tally tally(n.rule, static_cast<int>(n.models.size()), options_);
                    for (std::size_t i = 0; i < n.models.size() && !tally.decided(); ++i) {
                        InferScope member_scope;
                        const auto member = with_judge(n.child, n.models[i]);
                        tally.add(node(*member, child_path(path, i), attempt, member_scope, false).verdict);
                    }
                    out.ballots = tally.cast;
                    out.verdict = aggregate(n.rule, tally.cast);
                    out.short_circuited = tally.cut_short();
                }
                return out;
            },
            s.node);
    }

    CheckRunner& runner_;
    const ValidatorOptions& options_;
    const QuestionRecord& q_;
    const CandidateAnswer& a_;
    VerdictTrace& trace_;
};

// Same traversal as Evaluator, driven by a scenario instead of a backend.
class Counter {
public:
    Counter(const Scenario& scenario, const ValidatorOptions& options)
        : scenario_(scenario), options_(options) {}

    CallCount count(const StrategySpec& spec) {
        std::map<std::string, bool> scope;
        node(spec, "0", scope);
        return result_;
    }

private:
    using Scope = std::map<std::string, bool>;

    void touch(const Leaf& l, Scope& scope) {
        if (l.check == CheckKind::CycleConsistency && !scope[l.judge_model]) {
            scope[l.judge_model] = true;
            ++result_.aux_calls;
        }
    }

    // Returns the final turn verdict; appends every turn's verdict to `turns`.
    Verdict leaf(const Leaf& l, const std::string& path, Scope& scope, Tally* tally) {
        touch(l, scope);
        Verdict v = Verdict::Fail;
        for (int t = 0; t <= l.reflect_depth; ++t) {
            ++result_.judge_calls;
            v = scenario_(path, t);
            if (tally) {
                tally->add(v);
                if (t < l.reflect_depth && tally->decided()) break;
            }
        }
        return v;
    }

    Verdict node(const StrategySpec& s, const std::string& path, Scope& scope) {
        if (const auto* l = std::get_if<Leaf>(&s.node)) return leaf(*l, path, scope, nullptr);
        if (const auto* r = std::get_if<Repeat>(&s.node)) {
            Tally t(VoteRule::Unanimous, r->k, options_);
            for (int i = 0; i < r->k && !t.decided(); ++i) t.add(node(*r->child, child_path(path, i), scope));
            return aggregate(VoteRule::Unanimous, t.cast);
        }
        if (const auto* v = std::get_if<Vote>(&s.node)) {
            Tally t(v->rule, ballot_count(v->children), options_);
            for (std::size_t i = 0; i < v->children.size() && !t.decided(); ++i) {
                const auto& c = *v->children[i];
                const auto p = child_path(path, i);
                if (const auto* cl = std::get_if<Leaf>(&c.node)) {
                    leaf(*cl, p, scope, &t);
                } else if (const auto* cr = std::get_if<Repeat>(&c.node)) {
                    for (int j = 0; j < cr->k && !t.decided(); ++j) {
                        t.add(node(*cr->child, child_path(p, j), scope));
                    }
                } else {
                    t.add(node(c, p, scope));
                }
            }
            return aggregate(v->rule, t.cast);
        }
        if (const auto* p = std::get_if<Pipeline>(&s.node)) {
            for (std::size_t i = 0; i < p->stages.size(); ++i) {
                Scope stage_scope;
                if (node(*p->stages[i], child_path(path, i), stage_scope) == Verdict::Fail) {
                    return Verdict::Fail;
                }
            }
            return Verdict::Pass;
        }
        const auto& e = std::get<Ensemble>(s.node);
        Tally t(e.rule, static_cast<int>(e.models.size()), options_);
        for (std::size_t i = 0; i < e.models.size() && !t.decided(); ++i) {
            Scope member_scope;
            t.add(node(*with_judge(e.child, e.models[i]), child_path(path, i), member_scope));
        }
        return aggregate(e.rule, t.cast);
    }

    const Scenario& scenario_;
    const ValidatorOptions& options_;
    CallCount result_;
};

}  // namespace

Verdict aggregate(VoteRule rule, const std::vector<Verdict>& verdicts) {
    if (verdicts.empty()) throw Error(Errc::EmptyVote, "cannot aggregate an empty vote");
    std::size_t passes = 0;
    for (auto v : verdicts) passes += v == Verdict::Pass ? 1 : 0;
    if (rule == VoteRule::Unanimous) return passes == verdicts.size() ? Verdict::Pass : Verdict::Fail;
    return 2 * passes > verdicts.size() ? Verdict::Pass : Verdict::Fail;
}

Validator::Validator(CheckRunner& runner, SpecPtr spec, ValidatorOptions options, std::string validator_id)
    : runner_(runner), spec_(std::move(spec)), options_(options), id_(std::move(validator_id)) {
    if (!spec_) throw Error(Errc::InvalidInput, "validator needs a strategy");
    validate_spec(*spec_);
    if (id_.empty()) id_ = format_spec(*spec_);
}

VerdictTrace Validator::run(const QuestionRecord& question, const CandidateAnswer& answer) const {
    VerdictTrace trace;
    trace.question_id = question.id;
    trace.answer_id = answer.answer_id;
    trace.model_id = answer.model_id;
    trace.validator_id = id_;
    trace.spec = format_spec(*spec_);
    Evaluator eval(runner_, options_, question, answer, trace);
    try {
        trace.final = eval.root(*spec_).verdict;
    } catch (const Error& e) {
        trace.final.reset();
        trace.fail_stage.reset();
        trace.error = e.what();
        trace.error_code = std::string(errc_name(e.code()));
    }
    return trace;
}

std::vector<VerdictTrace> run_batch(const Validator& validator,
                                    const std::vector<std::pair<QuestionRecord, CandidateAnswer>>& pairs,
                                    int workers) {
    std::vector<VerdictTrace> out(pairs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= pairs.size()) return;
            try {
                out[i] = validator.run(pairs[i].first, pairs[i].second);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = pairs.size();
                return;
            }
        }
    };
    const auto n = static_cast<std::size_t>(std::max(1, workers));
    if (n == 1 || pairs.size() < 2) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < std::min(n, pairs.size()); ++t) threads.emplace_back(work);
        for (auto& t : threads) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

CallCount call_count(const StrategySpec& spec, const Scenario& scenario, const ValidatorOptions& options) {
    return Counter(scenario, options).count(spec);
}

void to_json(json& j, const StageOutcome& s) {
    j = json{{"path", s.path},
             {"stage", s.stage},
             {"verdicts", s.verdicts},
             {"aggregated", s.aggregated},
             {"short_circuited", s.short_circuited}};
}

void from_json(const json& j, StageOutcome& s) {
    s.path = j.value("path", std::string("0"));
    s.stage = j.value("stage", 1);
    s.verdicts = j.value("verdicts", std::vector<Verdict>{});
    s.aggregated = j.at("aggregated").get<Verdict>();
    s.short_circuited = j.value("short_circuited", false);
}

void to_json(json& j, const VerdictTrace& t) {
    j = json{{"question_id", t.question_id},
             {"answer_id", t.answer_id},
             {"model_id", t.model_id},
             {"validator_id", t.validator_id},
             {"spec", t.spec},
             {"final", t.final ? json(*t.final) : json(nullptr)},
             {"fail_stage", t.fail_stage ? json(*t.fail_stage) : json(nullptr)},
             {"stage_outcomes", t.stage_outcomes},
             {"steps", t.steps},
             {"ledger", t.ledger},
             {"judge_calls", t.judge_calls},
             {"aux_calls", t.aux_calls}};
    if (t.error) {
        j["error"] = *t.error;
        j["error_code"] = t.error_code.value_or("");
    }
}

void from_json(const json& j, VerdictTrace& t) {
    t.question_id = j.value("question_id", std::string{});
    t.answer_id = j.value("answer_id", std::string{});
    t.model_id = j.value("model_id", std::string{});
    t.validator_id = j.value("validator_id", std::string{});
    t.spec = j.value("spec", std::string{});
    if (auto it = j.find("final"); it != j.end() && !it->is_null()) {
        t.final = it->get<Verdict>();
    } else {
        t.final.reset();
    }
    if (auto it = j.find("fail_stage"); it != j.end() && !it->is_null()) {
        t.fail_stage = it->get<int>();
    } else {
        t.fail_stage.reset();
    }
    t.stage_outcomes = j.value("stage_outcomes", std::vector<StageOutcome>{});
    t.steps = j.value("steps", std::vector<JudgmentStep>{});
    t.ledger = j.value("ledger", gateway::LedgerEntry{});
    t.judge_calls = j.value("judge_calls", 0);
    t.aux_calls = j.value("aux_calls", 0);
    if (auto it = j.find("error"); it != j.end() && it->is_string()) {
        t.error = it->get<std::string>();
        t.error_code = j.value("error_code", std::string{});
    } else {
        t.error.reset();
        t.error_code.reset();
    }
}

}  // namespace uq::composer
