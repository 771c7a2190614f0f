#include "uq/gateway/model_call.hpp"

#include <fmt/format.h>

#include "uq/core/error.hpp"
#include "uq/core/fingerprint.hpp"

namespace uq::gateway {

std::string_view to_string(Role r) noexcept {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    throw Error(Errc::InvalidInput, fmt::format("unknown role '{}'", s));
}

int ModelCall::turn() const {
    int n = 0;
    for (const auto& m : messages) {
        if (m.role == Role::Assistant) ++n;
    }
    return n;
}

std::int64_t estimate_tokens(std::string_view text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

void to_json(json& j, const Message& m) {
    j = json{{"role", std::string(to_string(m.role))}, {"content", m.content}};
}

void from_json(const json& j, Message& m) {
    m.role = parse_role(j.at("role").get<std::string>());
    m.content = j.at("content").get<std::string>();
}

void to_json(json& j, const TokenUsage& u) { j = json{{"input", u.input}, {"output", u.output}}; }

void from_json(const json& j, TokenUsage& u) {
    u.input = j.value("input", std::int64_t{0});
    u.output = j.value("output", std::int64_t{0});
}

json cache_identity(const ModelCall& call) {
    json id{{"model_id", call.model_id},
            {"messages", call.messages},
            {"temperature", call.temperature},
            {"attempt_index", call.attempt_index}};
    id["seed"] = call.seed ? json(*call.seed) : json(nullptr);
    return id;
}

std::string cache_key(const ModelCall& call) { return fingerprint(cache_identity(call)); }

}  // namespace uq::gateway
