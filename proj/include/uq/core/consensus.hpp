#pragma once

#include <span>
#include <string_view>

#include "uq/core/json.hpp"
#include "uq/core/types.hpp"

namespace uq {

enum class Consensus { None, Correct, Incorrect, Disputed };

std::string_view to_string(Consensus c) noexcept;

// Only reviews at or above `min_confidence` with a Correct/Incorrect rating
// count. With `strict_dissent` (the default) a single qualifying dissent
// turns the outcome into Disputed; otherwise the side with at least
// `required` votes and a strict plurality wins (k-of-n).
struct ConsensusRule {
    int min_confidence = 4;
    int required = 1;
    bool strict_dissent = true;
};

void to_json(json& j, const ConsensusRule& r);
void from_json(const json& j, ConsensusRule& r);

Consensus consensus(std::span<const ReviewRecord> reviews, const ConsensusRule& rule = {});

}  // namespace uq
