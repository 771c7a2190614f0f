#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uq/core/types.hpp"

namespace uq::eval {

// Reads a labeled-pair JSONL file; with `drop_multiple_choice`, items whose
// question is marked multiple-choice are removed before anything else.
std::vector<LabeledPair> load_labeled(const std::filesystem::path& path, bool drop_multiple_choice = false);

std::vector<LabeledPair> drop_multiple_choice(std::vector<LabeledPair> pairs);

// A seed-determined subset of `n` pairs (all of them when n ≥ size), in a
// platform-independent order.
std::vector<LabeledPair> subsample(const std::vector<LabeledPair>& pairs, std::size_t n, std::uint64_t seed);

// Synthetic labeled pairs for simulation: the first round(base_rate·n) are
// correct. Answer ids are "sim-<i>".
std::vector<LabeledPair> synthetic_pairs(std::size_t n, double base_rate,
                                         const std::string& answer_model = "sim-answerer");

}  // namespace uq::eval
