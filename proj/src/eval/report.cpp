#include "uq/eval/report.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "uq/core/jsonl.hpp"

namespace uq::eval {

namespace {

std::string rank_cell(const std::optional<int>& r) { return r ? std::to_string(*r) : std::string("-"); }

std::string signed_points(double fraction) { return fmt::format("{:+.2f}", 100.0 * fraction); }

}  // namespace

std::string percent_cell(const std::optional<double>& fraction, int decimals) {
    if (!fraction) return "-";
    return fmt::format("{:.{}f}", 100.0 * *fraction, decimals);
}

EvalReport build_report(const std::vector<Judged>& records, bool include_self) {
    EvalReport r;
    r.scores = score(records);
    r.bias = bias_matrix(records);
    r.ranks = rank_trajectories(records);
    r.gaps = gv_gap(records, include_self);
    return r;
}

std::string render_metrics(const std::vector<ValidatorScore>& scores) {
    TextTable t({"validator", "accuracy", "precision", "recall", "pairs", "errors", "calls/pair"});
    for (const auto& s : scores) {
        t.add_row({s.validator_id, percent_cell(s.metrics.accuracy), percent_cell(s.metrics.precision),
                   percent_cell(s.metrics.recall), std::to_string(s.pairs), std::to_string(s.errors),
                   fmt::format("{:.2f}", s.mean_calls())});
    }
    return t.render();
}

std::string render_bias(const std::vector<BiasEntry>& bias) {
    std::vector<std::string> validators;
    for (const auto& b : bias) {
        if (std::find(validators.begin(), validators.end(), b.validator_id) == validators.end()) {
            validators.push_back(b.validator_id);
        }
    }
    std::sort(validators.begin(), validators.end());
    std::vector<std::string> headers{"answer model"};
    headers.insert(headers.end(), validators.begin(), validators.end());
    TextTable t(headers);
    std::vector<std::string> row;
    std::string current;
    for (const auto& b : bias) {
        if (b.answer_model_id != current) {
            if (!row.empty()) t.add_row(row);
            current = b.answer_model_id;
            row.assign(headers.size(), "-");
            row[0] = current;
        }
        const auto col = std::find(validators.begin(), validators.end(), b.validator_id) - validators.begin();
        row[static_cast<std::size_t>(col) + 1] = signed_points(b.bias);
    }
    if (!row.empty()) t.add_row(row);
    return t.render();
}

std::string render_ranks(const RankTable& ranks) {
    std::vector<std::string> headers{"model"};
    headers.insert(headers.end(), ranks.validators.begin(), ranks.validators.end());
    headers.push_back("GT");
    TextTable t(headers);
    for (const auto& r : ranks.rows) {
        std::vector<std::string> cells{r.model};
        for (const auto& x : r.ranks) cells.push_back(rank_cell(x));
        cells.push_back(rank_cell(r.gt_rank));
        t.add_row(std::move(cells));
    }
    return t.render();
}

std::string render_gaps(const std::vector<GapEntry>& gaps) {
    TextTable t({"model", "answer acc", "validation acc", "gap"});
    for (const auto& g : gaps) {
        t.add_row({g.model, percent_cell(g.answer_accuracy, 1), percent_cell(g.validation_accuracy, 1),
                   g.gap ? fmt::format("{:+.1f}", 100.0 * *g.gap) : std::string("-")});
    }
    return t.render();
}

std::string render_report(const EvalReport& report) {
    std::string out;
    out += "Validator metrics (%)\n\n" + render_metrics(report.scores);
    out += "\nBias: predicted minus ground-truth accuracy (points)\n\n" + render_bias(report.bias);
    out += "\nAnswer-model ranks per validator\n\n" + render_ranks(report.ranks);
    out += "\nGenerator/validator gap (%)\n\n" + render_gaps(report.gaps);
    return out;
}

std::string render_pass_rates(const PassRateReport& report) {
    const bool diamond = report.union_diamond_passed.has_value();
    std::vector<std::string> headers{"model", "passed", "rate"};
    if (diamond) headers.push_back("diamond");
    TextTable t(headers);
    for (const auto& r : report.rows) {
        std::vector<std::string> cells{r.model, fmt::format("{} / {}", r.passed, r.total),
                                       fmt::format("{:.1f}%", r.percent())};
        if (diamond) cells.push_back(fmt::format("{} / {}", r.diamond_passed.value_or(0), r.diamond_total.value_or(0)));
        t.add_row(std::move(cells));
    }
    std::vector<std::string> last{"unique questions", fmt::format("{} / {}", report.union_passed, report.union_total),
                                  fmt::format("{:.1f}%", report.union_total == 0
                                                             ? 0.0
                                                             : 100.0 * static_cast<double>(report.union_passed) /
                                                                   static_cast<double>(report.union_total))};
    if (diamond) last.push_back(std::to_string(*report.union_diamond_passed));
    t.add_row(std::move(last));
    return t.render();
}

std::string render_verification(const std::vector<VerificationRow>& rows) {
    TextTable t({"model", "passed", "verified correct"});
    std::int64_t correct = 0, total = 0;
    for (const auto& r : rows) {
        t.add_row({r.model, std::to_string(r.passed),
                   r.verified_total == 0 ? std::string("unverified")
                                         : fmt::format("{} / {}", r.verified_correct, r.verified_total)});
        correct += r.verified_correct;
        total += r.verified_total;
    }
    t.add_row({"total", "", total == 0 ? std::string("unverified") : fmt::format("{} / {}", correct, total)});
    return t.render();
}

void write_report(const std::filesystem::path& dir, const EvalReport& report, const json& manifest) {
    std::filesystem::create_directories(dir);
    std::vector<json> metrics, bias, ranks;
    for (const auto& s : report.scores) metrics.push_back(s);
    for (const auto& b : report.bias) bias.push_back(b);
    for (const auto& r : report.ranks.rows) {
        json by_validator = json::object();
        for (std::size_t i = 0; i < report.ranks.validators.size(); ++i) {
            by_validator[report.ranks.validators[i]] = r.ranks[i] ? json(*r.ranks[i]) : json(nullptr);
        }
        ranks.push_back(json{{"model", r.model},
                             {"ranks", by_validator},
                             {"gt_rank", r.gt_rank ? json(*r.gt_rank) : json(nullptr)}});
    }
    write_jsonl(dir / "report.metrics.jsonl", "metrics", metrics, manifest);
    write_jsonl(dir / "report.bias.jsonl", "bias", bias, manifest);
    write_jsonl(dir / "report.ranks.jsonl", "ranks", ranks, manifest);
    write_file_atomic(dir / "report.txt", render_report(report));
}

}  // namespace uq::eval
