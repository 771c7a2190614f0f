#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uq/core/json.hpp"
#include "uq/core/types.hpp"

namespace uq::eval {

// Positive class: validator Pass. tp = Pass on a correct answer.
struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    void add(GroundTruth truth, Verdict verdict);
    std::int64_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

struct Metrics {
    double accuracy = 0.0;
    std::optional<double> precision;  // null when nothing passed
    std::optional<double> recall;     // null when nothing was correct
};

// Throws Error(EmptyDataset) on zero totals.
Metrics compute_metrics(const ConfusionCounts& c);

// Cohen's kappa over paired binary verdicts. Null when either rater uses a
// single class, where kappa is undefined. Throws Error(LengthMismatch).
std::optional<double> cohen_kappa(const std::vector<Verdict>& a, const std::vector<Verdict>& b);

struct ModelTally {
    std::string model;
    std::int64_t passed = 0;
    std::int64_t total = 0;
};

struct RankEntry {
    std::string model;
    int rank = 0;
    std::int64_t passed = 0;
    std::int64_t total = 0;
    double fraction = 0.0;
};

// Competition ranking ("1, 1, 3") by pass fraction, descending. Fractions are
// compared exactly as rationals; equal fractions share a rank and are listed
// by model id. Throws Error(EmptyDataset) when a model has no pairs.
std::vector<RankEntry> rank_models(const std::vector<ModelTally>& tallies);

void to_json(json& j, const ConfusionCounts& c);
void to_json(json& j, const Metrics& m);
void to_json(json& j, const RankEntry& r);

}  // namespace uq::eval
