#pragma once

// Random strategy trees, deterministic verdict scenarios, and a plain
// evaluator that casts every ballot, for checking the composer against.

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "uq/composer/validator.hpp"
#include "uq/gateway/mock.hpp"

namespace uq::test {

using namespace uq::composer;
using gateway::ModelCall;

inline const std::vector<std::string> kJudges{"j1", "j2", "gemini-2.5-pro"};

inline SpecPtr random_spec(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 4);
    std::uniform_int_distribution<int> small(1, 3);
    auto rule = [&] { return rng() % 2 ? VoteRule::Majority : VoteRule::Unanimous; };
    switch (pick(rng)) {
    case 0:
        return leaf(strategy::kAllChecks[rng() % 4], kJudges[rng() % kJudges.size()],
                    static_cast<int>(rng() % 3));
    case 1:
        return repeat(small(rng), random_spec(rng, depth - 1));
    case 2: {
        std::vector<SpecPtr> kids;
        for (int i = small(rng); i > 0; --i) kids.push_back(random_spec(rng, depth - 1));
        return vote(rule(), std::move(kids));
    }
    case 3: {
        std::vector<SpecPtr> stages;
        for (int i = small(rng); i > 0; --i) stages.push_back(random_spec(rng, depth - 1));
        return pipeline(std::move(stages));
    }
    default: {
        std::vector<std::string> models(kJudges.begin(), kJudges.begin() + small(rng));
        return ensemble(rule(), std::move(models), random_spec(rng, depth - 1));
    }
    }
}

// Deterministic verdict per (path, turn) with a seed.
inline Scenario make_scenario(std::uint64_t seed, double pass_rate) {
    return [seed, pass_rate](const std::string& path, int turn) {
        std::seed_seq seq(path.begin(), path.end());
        std::vector<std::uint32_t> words(1);
        seq.generate(words.begin(), words.end());
        std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(words[0]) << 8) ^ static_cast<std::uint64_t>(turn));
        return std::uniform_real_distribution<double>(0, 1)(rng) < pass_rate ? Verdict::Pass : Verdict::Fail;
    };
}

// Straightforward full evaluation: every ballot cast, no early exits except
// the pipeline's own stage order.
struct Oracle {
    const Scenario& scenario;
    int judge_calls = 0;
    int aux_calls = 0;

    using Scope = std::set<std::string>;

    Verdict turn(const Leaf& l, const std::string& judge, const std::string& path, int t, Scope& scope) {
        if (t == 0 && l.check == CheckKind::CycleConsistency && scope.insert(judge).second) ++aux_calls;
        ++judge_calls;
        return scenario(path, t);
    }

    static Verdict combine(VoteRule rule, const std::vector<Verdict>& v) {
        const auto passes = std::count(v.begin(), v.end(), Verdict::Pass);
        const bool ok = rule == VoteRule::Unanimous ? passes == static_cast<long>(v.size())
                                                    : passes * 2 > static_cast<long>(v.size());
        return ok ? Verdict::Pass : Verdict::Fail;
    }

    Verdict eval(const StrategySpec& s, const std::string& path, const std::string* judge, Scope& scope) {
        auto sub = [&](std::size_t i) { return path + "." + std::to_string(i); };
        if (const auto* l = std::get_if<Leaf>(&s.node)) {
            const auto& who = judge ? *judge : l->judge_model;
            Verdict v = Verdict::Fail;
            for (int t = 0; t <= l->reflect_depth; ++t) v = turn(*l, who, path, t, scope);
            return v;
        }
        if (const auto* r = std::get_if<Repeat>(&s.node)) {
            std::vector<Verdict> v;
            for (int i = 0; i < r->k; ++i) v.push_back(eval(*r->child, sub(i), judge, scope));
            return combine(VoteRule::Unanimous, v);
        }
        if (const auto* vt = std::get_if<Vote>(&s.node)) {
            std::vector<Verdict> ballots;
            for (std::size_t i = 0; i < vt->children.size(); ++i) {
                const auto& c = *vt->children[i];
                if (const auto* cl = std::get_if<Leaf>(&c.node)) {
                    const auto& who = judge ? *judge : cl->judge_model;
                    for (int t = 0; t <= cl->reflect_depth; ++t) ballots.push_back(turn(*cl, who, sub(i), t, scope));
                } else if (const auto* cr = std::get_if<Repeat>(&c.node)) {
                    for (int j = 0; j < cr->k; ++j) {
                        ballots.push_back(eval(*cr->child, sub(i) + "." + std::to_string(j), judge, scope));
                    }
                } else {
                    ballots.push_back(eval(c, sub(i), judge, scope));
                }
            }
            return combine(vt->rule, ballots);
        }
        if (const auto* p = std::get_if<Pipeline>(&s.node)) {
            for (std::size_t i = 0; i < p->stages.size(); ++i) {
                Scope stage;
                if (eval(*p->stages[i], sub(i), judge, stage) == Verdict::Fail) return Verdict::Fail;
            }
            return Verdict::Pass;
        }
        const auto& e = std::get<Ensemble>(s.node);
        std::vector<Verdict> ballots;
        for (std::size_t i = 0; i < e.models.size(); ++i) {
            Scope member;
            ballots.push_back(eval(*e.child, sub(i), &e.models[i], member));
        }
        return combine(e.rule, ballots);
    }
};

// Replies with the scenario's verdict for the call's step path and turn.
inline std::shared_ptr<gateway::Backend> scenario_backend(Scenario scenario) {
    return std::make_shared<gateway::LambdaBackend>([scenario](const ModelCall& c) -> std::string {
        if (c.tags.purpose == "infer") return "What is being asked?";
        const auto v = scenario(c.tags.step_path, c.turn());
        return c.tags.marker_label + (v == Verdict::Pass ? ": [[Y]]" : ": [[N]]");
    });
}

}  // namespace uq::test
