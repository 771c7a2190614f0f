#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uq/eval/analysis.hpp"
#include "uq/gateway/mock.hpp"

namespace uq::eval {

struct SimulationConfig {
    gateway::JudgeRates rates{0.9, 0.3};
    double base_rate = 0.2;
    std::size_t pairs = 100'000;
    std::uint64_t seed = 0;
    std::string judge_model = "judge";
    std::vector<std::string> strategies;  // defaults to unanimous-of-k for k = 1, 3, 5
    int workers = 1;
};

struct SimulationPoint {
    ValidatorScore score;
    double pass_rate = 0.0;
};

// Runs each strategy over synthetic pairs judged by a scripted judge with the
// configured per-call rates.
std::vector<SimulationPoint> simulate(const SimulationConfig& config);

std::vector<std::string> default_simulation_strategies(const std::string& judge_model);

}  // namespace uq::eval
