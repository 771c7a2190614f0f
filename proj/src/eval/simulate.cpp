#include "uq/eval/simulate.hpp"

#include <memory>

#include <fmt/format.h>

#include "uq/composer/validator.hpp"
#include "uq/eval/dataset.hpp"
#include "uq/strategy/judge.hpp"

namespace uq::eval {

std::vector<std::string> default_simulation_strategies(const std::string& judge_model) {
    std::vector<std::string> out;
    for (int k : {1, 3, 5}) out.push_back(fmt::format("unanimous(repeat({}, c[{}]))", k, judge_model));
    return out;
}

std::vector<SimulationPoint> simulate(const SimulationConfig& config) {
    const auto specs = config.strategies.empty() ? default_simulation_strategies(config.judge_model)
                                                 : config.strategies;
    const auto labeled = synthetic_pairs(config.pairs, config.base_rate);
    auto truth = std::make_shared<gateway::TruthTable>();
    std::vector<std::pair<QuestionRecord, CandidateAnswer>> pairs;
    pairs.reserve(labeled.size());
    for (const auto& p : labeled) {
        truth->set(p.answer.answer_id, p.ground_truth);
        pairs.emplace_back(p.question, p.answer);
    }
    const auto labels = labels_of(labeled);

    std::vector<SimulationPoint> out;
    for (const auto& text : specs) {
        gateway::GatewayOptions gopts;
        gopts.cache = false;
        gateway::Gateway gw(gopts);
        gw.register_fallback(std::make_shared<gateway::ScriptedJudge>(config.rates, config.seed, truth));
        strategy::CheckRunner runner(gw, strategy::PromptPack::builtin());
        composer::ValidatorOptions vopts;
        vopts.keep_transcripts = false;
        composer::Validator validator(runner, composer::parse_spec(text), vopts);
        const auto traces = composer::run_batch(validator, pairs, config.workers);
        auto scores = score(join_labels(traces, labels));
        SimulationPoint point;
        point.score = std::move(scores.front());
        const auto& c = point.score.counts;
        point.pass_rate = static_cast<double>(c.tp + c.fp) / static_cast<double>(c.total());
        out.push_back(std::move(point));
    }
    return out;
}

}  // namespace uq::eval
