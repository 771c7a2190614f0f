#include "uq/eval/metrics.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq::eval {

void ConfusionCounts::add(GroundTruth truth, Verdict verdict) {
    const bool correct = truth == GroundTruth::Correct;
    const bool pass = verdict == Verdict::Pass;
    if (correct && pass) ++tp;
    else if (!correct && pass) ++fp;
    else if (!correct && !pass) ++tn;
    else ++fn;
}

Metrics compute_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw Error(Errc::EmptyDataset, "no scored pairs");
    Metrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return m;
}

std::optional<double> cohen_kappa(const std::vector<Verdict>& a, const std::vector<Verdict>& b) {
    if (a.size() != b.size()) {
        throw Error(Errc::LengthMismatch,
                    fmt::format("kappa needs paired verdicts ({} vs {})", a.size(), b.size()));
    }
    if (a.empty()) return std::nullopt;
    double both_pass = 0, a_pass = 0, b_pass = 0, agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool pa = a[i] == Verdict::Pass;
        const bool pb = b[i] == Verdict::Pass;
        a_pass += pa;
        b_pass += pb;
        both_pass += pa && pb;
        agree += pa == pb;
    }
    const double n = static_cast<double>(a.size());
    if (a_pass == 0 || a_pass == n || b_pass == 0 || b_pass == n) return std::nullopt;
    const double po = agree / n;
    const double pe = (a_pass / n) * (b_pass / n) + (1 - a_pass / n) * (1 - b_pass / n);
    return (po - pe) / (1 - pe);
}

std::vector<RankEntry> rank_models(const std::vector<ModelTally>& tallies) {
    std::vector<RankEntry> out;
    out.reserve(tallies.size());
    for (const auto& t : tallies) {
        if (t.total <= 0) {
            throw Error(Errc::EmptyDataset, fmt::format("model '{}' has no judged pairs", t.model));
        }
        out.push_back(RankEntry{t.model, 0, t.passed, t.total,
                                static_cast<double>(t.passed) / static_cast<double>(t.total)});
    }
    // a/b vs c/d compared as a·d vs c·b; both denominators are positive.
    auto cmp = [](const RankEntry& x, const RankEntry& y) {
        const auto lhs = static_cast<__int128>(x.passed) * y.total;
        const auto rhs = static_cast<__int128>(y.passed) * x.total;
        return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    };
    std::sort(out.begin(), out.end(), [&](const RankEntry& x, const RankEntry& y) {
        const int c = cmp(x, y);
        return c != 0 ? c > 0 : x.model < y.model;
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].rank = (i > 0 && cmp(out[i], out[i - 1]) == 0) ? out[i - 1].rank : static_cast<int>(i) + 1;
    }
    return out;
}

void to_json(json& j, const ConfusionCounts& c) {
    j = json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

void to_json(json& j, const Metrics& m) {
    j = json{{"accuracy", m.accuracy},
             {"precision", m.precision ? json(*m.precision) : json(nullptr)},
             {"recall", m.recall ? json(*m.recall) : json(nullptr)}};
}

void to_json(json& j, const RankEntry& r) {
    j = json{{"model", r.model},
             {"rank", r.rank},
             {"passed", r.passed},
             {"total", r.total},
             {"fraction", r.fraction}};
}

}  // namespace uq::eval
