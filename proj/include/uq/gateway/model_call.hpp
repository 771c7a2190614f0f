#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uq/core/json.hpp"

namespace uq::gateway {

enum class Role { System, User, Assistant };

std::string_view to_string(Role r) noexcept;
Role parse_role(std::string_view s);

struct Message {
    Role role = Role::User;
    std::string content;

    bool operator==(const Message&) const = default;
};

// Routing metadata that travels with a call but is not part of its identity.
// Scripted backends read it to decide replies (e.g. the hidden ground truth of
// `answer_id`); real backends ignore it.
struct CallTags {
    std::string purpose;  // "judge", "infer", "answer", "filter"
    std::string check;    // check slug for judge calls
    std::string marker_label;  // e.g. "Accepted"; how a verdict is phrased
    std::string question_id;
    std::string answer_id;
    std::string answer_model;
    std::string step_path;

    bool operator==(const CallTags&) const = default;
};

struct ModelCall {
    std::string model_id;
    std::vector<Message> messages;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    std::optional<int> max_output;
    // Distinguishes independent samples of otherwise identical calls.
    int attempt_index = 0;
    CallTags tags;

    // Number of assistant turns already present, i.e. the reflection turn.
    int turn() const;
};

struct TokenUsage {
    std::int64_t input = 0;
    std::int64_t output = 0;

    bool operator==(const TokenUsage&) const = default;
};

struct ModelReply {
    std::string text;
    TokenUsage usage;
    std::int64_t latency_ms = 0;
    bool cached = false;
};

// Rough whitespace-independent estimate used by mock backends.
std::int64_t estimate_tokens(std::string_view text);

void to_json(json& j, const Message& m);
void from_json(const json& j, Message& m);
void to_json(json& j, const TokenUsage& u);
void from_json(const json& j, TokenUsage& u);

// The identity of a call for caching: model, messages, temperature, seed and
// attempt index. Tags and max_output are excluded.
json cache_identity(const ModelCall& call);
std::string cache_key(const ModelCall& call);

}  // namespace uq::gateway
