#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uq/core/table.hpp"
#include "uq/eval/analysis.hpp"

namespace uq::eval {

// "-" for null, otherwise a percentage with `decimals` places.
std::string percent_cell(const std::optional<double>& fraction, int decimals = 2);

struct EvalReport {
    std::vector<ValidatorScore> scores;
    std::vector<BiasEntry> bias;
    RankTable ranks;
    std::vector<GapEntry> gaps;
};

// Builds every labeled-set analysis from joined records.
EvalReport build_report(const std::vector<Judged>& records, bool include_self = false);

std::string render_metrics(const std::vector<ValidatorScore>& scores);
std::string render_bias(const std::vector<BiasEntry>& bias);
std::string render_ranks(const RankTable& ranks);
std::string render_gaps(const std::vector<GapEntry>& gaps);
std::string render_report(const EvalReport& report);

std::string render_pass_rates(const PassRateReport& report);
std::string render_verification(const std::vector<VerificationRow>& rows);

// report.metrics.jsonl, report.bias.jsonl, report.ranks.jsonl, report.txt
void write_report(const std::filesystem::path& dir, const EvalReport& report, const json& manifest = nullptr);

}  // namespace uq::eval
