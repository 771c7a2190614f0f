// Prints one PASS/FAIL line per primary acceptance criterion and exits
// nonzero if any fails. Everything runs against mock backends.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "composer_oracle.hpp"
#include "curation_oracle.hpp"
#include "support.hpp"
#include "uq/composer/validator.hpp"
#include "uq/core/error.hpp"
#include "uq/curation/llm_filter.hpp"
#include "uq/curation/rules.hpp"
#include "uq/eval/metrics.hpp"
#include "uq/eval/simulate.hpp"
#include "uq/gateway/mock.hpp"
#include "uq/service/store.hpp"
#include "uq/strategy/judge.hpp"

using namespace uq;

namespace {

// Pinned tolerances and budgets.
constexpr double kMetricTol = 1e-9;
constexpr double kMonteCarloTol = 0.01;
constexpr std::size_t kMonteCarloPairs = 100'000;
constexpr double kAggregationBudgetS = 10.0;
constexpr double kMonteCarloBudgetS = 60.0;
constexpr int kRandomTrees = 200;

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

gateway::GatewayOptions no_cache() {
    gateway::GatewayOptions o;
    o.cache = false;
    return o;
}

Outcome aggregation_oracle() {
    Outcome out;
    const auto t0 = Clock::now();
    for (int k = 1; k <= 5; ++k) {
        for (int mask = 0; mask < (1 << k); ++mask) {
            std::vector<Verdict> v;
            int passes = 0;
            for (int i = 0; i < k; ++i) {
                passes += mask >> i & 1;
                v.push_back(mask >> i & 1 ? Verdict::Pass : Verdict::Fail);
            }
            out.require((composer::aggregate(composer::VoteRule::Unanimous, v) == Verdict::Pass) == (passes == k),
                        fmt::format("unanimous k={} mask={}", k, mask));
            out.require((composer::aggregate(composer::VoteRule::Majority, v) == Verdict::Pass) == (2 * passes > k),
                        fmt::format("majority k={} mask={}", k, mask));
        }
    }

    std::mt19937_64 rng(20250601);
    composer::ValidatorOptions lazy, full;
    full.short_circuit = false;
    full.full_traces = true;
    const auto q = test::question("math:1");
    const auto a = test::answer("math:1", "a1");
    for (int i = 0; i < kRandomTrees && out.ok; ++i) {
        const auto spec = test::random_spec(rng, 3);
        const auto scenario = test::make_scenario(rng(), i % 2 ? 0.85 : 0.55);
        test::Oracle oracle{scenario};
        test::Oracle::Scope root;
        const auto expected = oracle.eval(*spec, "0", nullptr, root);
        std::optional<Verdict> verdicts[2];
        int n = 0;
        for (const auto& opts : {lazy, full}) {
            gateway::Gateway gw(no_cache());
            gw.register_fallback(test::scenario_backend(scenario));
            strategy::CheckRunner runner(gw, strategy::PromptPack::builtin());
            composer::Validator validator(runner, spec, opts);
            verdicts[n++] = validator.run(q, a).final;
        }
        out.require(verdicts[0] && verdicts[1] && *verdicts[0] == *verdicts[1] && *verdicts[0] == expected,
                    "tree " + composer::format_spec(*spec));
    }
    const double elapsed = seconds_since(t0);
    out.require(elapsed < kAggregationBudgetS, fmt::format("took {:.1f} s", elapsed));
    if (out.ok) out.detail = fmt::format("k<=5 truth tables, {} random trees, {:.2f} s", kRandomTrees, elapsed);
    return out;
}

Outcome pipeline_fixture() {
    Outcome out;
    std::mutex mu;
    std::vector<gateway::ModelCall> calls;
    gateway::Gateway gw(no_cache());
    auto scripted = std::make_shared<gateway::ScriptedBackend>(json::parse(R"({
        "rules": [
            {"purpose": "infer", "reply": "Is every bounded harmonic function on the plane constant?"},
            {"check": "flc", "reply": "The argument misapplies Liouville.\n\nNo Factual Errors: [[N]]"},
            {"pass_probability": 1.0}
        ]})"));
    gw.register_fallback(std::make_shared<gateway::LambdaBackend>([&](const gateway::ModelCall& c) {
        {
            std::lock_guard lock(mu);
            calls.push_back(c);
        }
        return scripted->complete(c).text;
    }));
    strategy::CheckRunner runner(gw, strategy::PromptPack::builtin());
    composer::Validator validator(runner, composer::default_pipeline("o3"));
    const auto trace = validator.run(test::question("math:1"), test::answer("math:1", "a1"));

    // By hand: one question inference, three cycle-consistency turns that
    // pass, then the first fact/logic turn fails and ends everything.
    const int expected_judge = 3 + 1, expected_aux = 1;
    int stage3 = 0;
    for (const auto& c : calls) stage3 += c.tags.check == "c";
    out.require(trace.final == Verdict::Fail, "final verdict is not Fail");
    out.require(trace.fail_stage == 2, "fail_stage != 2");
    out.require(stage3 == 0, fmt::format("{} stage-3 calls", stage3));
    out.require(trace.judge_calls == expected_judge, fmt::format("judge_calls {}", trace.judge_calls));
    out.require(trace.aux_calls == expected_aux, fmt::format("aux_calls {}", trace.aux_calls));
    out.require(static_cast<int>(calls.size()) == expected_judge + expected_aux,
                fmt::format("{} backend calls", calls.size()));
    if (out.ok) out.detail = "Fail at stage 2, 4 judge + 1 inference calls, 0 stage-3 calls";
    return out;
}

Outcome metric_correctness() {
    Outcome out;
    const auto m = eval::compute_metrics(eval::ConfusionCounts{2, 3, 4, 1});
    out.require(std::abs(m.accuracy - 0.6) < kMetricTol, "accuracy");
    out.require(m.precision && std::abs(*m.precision - 0.4) < kMetricTol, "precision");
    out.require(m.recall && std::abs(*m.recall - 2.0 / 3.0) < kMetricTol, "recall");
    out.require(!eval::compute_metrics(eval::ConfusionCounts{0, 0, 5, 2}).precision, "zero-positive precision");

    std::vector<Verdict> a{Verdict::Pass, Verdict::Fail, Verdict::Pass, Verdict::Fail};
    const auto perfect = eval::cohen_kappa(a, a);
    out.require(perfect && std::abs(*perfect - 1.0) < kMetricTol, "kappa on perfect agreement");
    const std::vector<Verdict> flat(4, Verdict::Pass);
    out.require(!eval::cohen_kappa(a, flat), "kappa on degenerate marginals");
    if (out.ok) out.detail = "0.600 / 0.400 / 0.6667, null precision, kappa 1 and null";
    return out;
}

struct SimulationRun {
    std::vector<eval::SimulationPoint> points;
    double seconds = 0;
};

const SimulationRun& simulation() {
    static const SimulationRun run = [] {
        eval::SimulationConfig cfg;
        cfg.rates = {0.9, 0.3};
        cfg.base_rate = 0.2;
        cfg.pairs = kMonteCarloPairs;
        cfg.seed = 7;
        cfg.strategies = {"c[judge]", "unanimous(repeat(3, c[judge]))", "unanimous(repeat(5, c[judge]))"};
        const auto t0 = Clock::now();
        SimulationRun r;
        r.points = eval::simulate(cfg);
        r.seconds = seconds_since(t0);
        return r;
    }();
    return run;
}

Outcome synthetic_judge() {
    Outcome out;
    const auto t0 = Clock::now();
    eval::SimulationConfig cfg;
    cfg.rates = {0.9, 0.3};
    cfg.base_rate = 0.2;
    cfg.pairs = kMonteCarloPairs;
    cfg.seed = 11;
    cfg.strategies = {"unanimous(repeat(3, c[judge]))"};
    const auto points = eval::simulate(cfg);
    const double elapsed = seconds_since(t0);
    const double t3 = std::pow(0.9, 3), f3 = std::pow(0.3, 3);
    const double closed = 0.2 * t3 / (0.2 * t3 + 0.8 * f3);
    const auto& p = points.at(0).score.metrics.precision;
    out.require(p.has_value(), "no precision");
    const double measured = p.value_or(0);
    out.require(std::abs(measured - closed) <= kMonteCarloTol,
                fmt::format("precision {:.4f} vs {:.4f}", measured, closed));
    out.require(elapsed < kMonteCarloBudgetS, fmt::format("took {:.1f} s", elapsed));
    if (out.ok) {
        out.detail = fmt::format("precision {:.4f} vs closed form {:.4f} over {} pairs, {:.1f} s", measured, closed,
                                 kMonteCarloPairs, elapsed);
    }
    return out;
}

Outcome precision_recall_direction() {
    Outcome out;
    const auto& run = simulation();
    out.require(run.points.size() == 3, "expected three strategies");
    std::string line;
    for (std::size_t i = 0; i < run.points.size(); ++i) {
        const auto& m = run.points[i].score.metrics;
        line += fmt::format("{}k={}: P {:.3f} R {:.3f}", i ? ", " : "", i == 0 ? 1 : 2 * static_cast<int>(i) + 1,
                            m.precision.value_or(-1), m.recall.value_or(-1));
        if (i == 0) continue;
        const auto& prev = run.points[i - 1].score.metrics;
        out.require(m.precision && prev.precision && *m.precision >= *prev.precision, "precision decreased");
        out.require(m.recall && prev.recall && *m.recall <= *prev.recall, "recall increased");
    }
    if (out.ok) out.detail = line;
    return out;
}

Outcome verdict_parser() {
    Outcome out;
    struct Golden {
        const char* reply;
        strategy::CheckKind check;
        Verdict expected;
    };
    using strategy::CheckKind;
    const Golden goldens[] = {
        {"The answer is complete.\n\nAccepted: [[Y]]", CheckKind::Correctness, Verdict::Pass},
        {"A step is missing.\nAccepted: [[N]]", CheckKind::Correctness, Verdict::Fail},
        {"No Factual Errors: [[Y]]", CheckKind::FactLogic, Verdict::Pass},
        {"Relevant: [[N]]", CheckKind::CycleConsistency, Verdict::Fail},
        {"First: Accepted: [[N]]. On reflection, Accepted: [[Y]]", CheckKind::Correctness, Verdict::Pass},
        {"Accepted: [[Y]]\nThinking twice...\nAccepted: [[N]]", CheckKind::Correctness, Verdict::Fail},
    };
    for (const auto& g : goldens) {
        try {
            out.require(strategy::parse_verdict(g.reply, g.check).verdict == g.expected, g.reply);
        } catch (const Error& e) {
            out.require(false, fmt::format("'{}' raised {}", g.reply, e.what()));
        }
    }
    bool raised = false;
    try {
        strategy::parse_verdict("I think it is fine.", strategy::CheckKind::Correctness);
    } catch (const Error& e) {
        raised = e.code() == Errc::UnparsableVerdict;
    }
    out.require(raised, "no-marker reply did not raise UnparsableVerdict");
    if (out.ok) out.detail = "4 check markers, last marker wins, no marker raises";
    return out;
}

Outcome rule_filter_oracle() {
    Outcome out;
    std::mt19937_64 rng(1000);
    const auto corpus = test::random_corpus(rng, 1000);
    auto cfg = test::test_config();
    // Looser than the shipped defaults so that a few hundred records reach
    // the percentile rule.
    cfg.defaults.min_age_years = 1.0;
    cfg.defaults.min_views = 100;
    cfg.defaults.min_votes = 1;
    cfg.defaults.max_views_per_vote = 20'000;
    cfg.defaults.top_percentile = 0.6;
    cfg.defaults.require_zero_answers = false;
    const auto engine = curation::rule_filter(corpus, cfg, test::kNow);
    const auto reference = test::Reference::run(corpus, cfg);
    out.require(test::canonical(engine.kept) == test::canonical(reference),
                fmt::format("engine kept {}, reference kept {}", engine.kept.size(), reference.size()));
    out.require(!engine.kept.empty(), "nothing survived");

    const auto rows = curation::funnel_stats(
        {{"Raw question pool", 3'000'000}, {"Rule-based filtering", 33'916}, {"LLM-based filtering", 7'685},
         {"Human review", 500}});
    out.require(rows.size() == 4 && rows[1].pct_of_original == 1.13 && rows[2].pct_of_original == 0.26 &&
                    rows[3].pct_of_original == 0.02,
                "funnel percentages");
    if (out.ok) {
        out.detail = fmt::format("{} of 1000 kept, identical to reference; funnel 1.13% / 0.26% / 0.02%",
                                 engine.kept.size());
    }
    return out;
}

Outcome llm_filter_thresholds() {
    Outcome out;
    auto keeps = [](std::vector<curation::QualityCall> judgments) {
        gateway::Gateway gw(no_cache());
        gw.register_fallback(std::make_shared<gateway::LambdaBackend>([judgments](const gateway::ModelCall& c) {
            if (c.tags.purpose == "answer") return std::string("Drafted answer.");
            return curation::format_quality_reply(judgments.at(static_cast<std::size_t>(c.attempt_index)));
        }));
        return curation::llm_filter(gw, strategy::PromptPack::builtin(), test::question("math:1"), "o4-mini", "o3")
            .keep;
    };
    const curation::QualityCall easy{50, 60, true, true, true}, hard{35, 60, true, true, true};
    auto dissent = hard;
    dissent.well_defined = false;
    out.require(keeps({hard, hard, hard}), "(35, 60, all yes) was dropped");
    out.require(!keeps({easy, easy, easy}), "(50, 60, all yes) was kept");
    out.require(!keeps({hard, dissent, hard}), "a single binary dissent was kept");
    if (out.ok) out.detail = "(35, 60) keeps, (50, 60) drops, one dissent drops";
    return out;
}

Outcome service_round_trip() {
    Outcome out;
    test::TempDir dir;
    service::Stats before;
    std::vector<service::RankingEntry> ranking;
    {
        service::ReviewStore store(dir.path());
        store.put_question(test::question("math:1"));
        const auto id = store.submit_answer(test::answer("math:1", "a1", "o3-pro"), "Answer the question: ...");
        composer::VerdictTrace trace;
        trace.final = Verdict::Pass;
        trace.validator_id = "o3";
        store.attach_trace(id, trace);
        ReviewRecord review;
        review.answer_id = id;
        review.reviewer_id = "expert";
        review.correctness = Correctness::Correct;
        review.confidence = 5;
        store.submit_review(review);
        before = store.stats();
        ranking = store.ranking();
    }
    out.require(before.resolved == 1, "resolved != 1");
    out.require(!ranking.empty() && ranking[0].model_id == "o3-pro" && ranking[0].verified_resolved == 1,
                "ranking does not credit the model");
    service::ReviewStore reopened(dir.path());
    out.require(reopened.stats() == before, "stats differ after restart");
    out.require(reopened.ranking() == ranking, "ranking differs after restart");
    if (out.ok) out.detail = "resolved=1, o3-pro credited, identical after restart";
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"aggregation oracle equivalence", aggregation_oracle},
        {"pipeline semantics fixture", pipeline_fixture},
        {"metric correctness", metric_correctness},
        {"synthetic-judge precision", synthetic_judge},
        {"precision-recall direction", precision_recall_direction},
        {"verdict parser goldens", verdict_parser},
        {"rule-filter oracle and funnel", rule_filter_oracle},
        {"LLM-filter thresholds", llm_filter_thresholds},
        {"service round-trip", service_round_trip},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = Outcome{false, fmt::format("exception: {}", e.what())};
        }
        failed += !o.ok;
        std::printf("[%s] %s: %s\n", o.ok ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
