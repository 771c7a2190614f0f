#pragma once

#include <json.hpp>  // vendored nlohmann/json

#include "uq/core/types.hpp"

namespace uq {

using json = nlohmann::json;

void to_json(json& j, const QuestionRecord& q);
void from_json(const json& j, QuestionRecord& q);
void to_json(json& j, const Sampling& s);
void from_json(const json& j, Sampling& s);
void to_json(json& j, const CandidateAnswer& a);
void from_json(const json& j, CandidateAnswer& a);
void to_json(json& j, const LabeledPair& p);
void from_json(const json& j, LabeledPair& p);
void to_json(json& j, const ReviewRecord& r);
void from_json(const json& j, ReviewRecord& r);

void to_json(json& j, Verdict v);
void from_json(const json& j, Verdict& v);
void to_json(json& j, GroundTruth g);
void from_json(const json& j, GroundTruth& g);
void to_json(json& j, Correctness c);
void from_json(const json& j, Correctness& c);

Verdict parse_verdict_name(std::string_view s);
GroundTruth parse_ground_truth_name(std::string_view s);
Correctness parse_correctness_name(std::string_view s);
Provenance parse_provenance_name(std::string_view s);

}  // namespace uq
