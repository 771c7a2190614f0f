#pragma once

#include <string>
#include <vector>

#include "uq/core/types.hpp"

namespace uq {

// Each returns one human-readable entry per violated invariant, empty when
// the record is well formed.
std::vector<std::string> validate_record(const QuestionRecord& q);
std::vector<std::string> validate_record(const CandidateAnswer& a);
std::vector<std::string> validate_record(const LabeledPair& p);
std::vector<std::string> validate_record(const ReviewRecord& r);

// Dataset-level checks: id uniqueness for questions, answer_id uniqueness per
// question for answers.
std::vector<std::string> validate_dataset(const std::vector<QuestionRecord>& qs);
std::vector<std::string> validate_dataset(const std::vector<CandidateAnswer>& as);

}  // namespace uq
