#pragma once

#include <string>
#include <string_view>

#include "uq/core/json.hpp"
#include "uq/core/types.hpp"

namespace uq {

// Lowercase hex SHA-256 of raw bytes.
std::string sha256_hex(std::string_view bytes);

// Canonical byte form of a JSON value: keys sorted, UTF-8, no insignificant
// whitespace. Two values with equal content always produce equal bytes.
std::string canonical_bytes(const json& value);

std::string fingerprint(const json& value);

// Reproducibility hash binding a question, an answer and the exact prompt
// used to produce it. The answer's own `prompt_fingerprint` field is excluded.
std::string canonical_fingerprint(const QuestionRecord& question, const CandidateAnswer& answer,
                                  std::string_view prompt_text, const Sampling& sampling);

}  // namespace uq
