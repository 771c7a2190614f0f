#include "uq/gateway/http_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>

#include "uq/core/error.hpp"

namespace uq::gateway {

namespace {

class OpenAiAdapter final : public ChatAdapter {
public:
    std::string path() const override { return "/v1/chat/completions"; }

    HeaderList headers(const std::string& api_key) const override {
        HeaderList h;
        if (!api_key.empty()) h.emplace_back("Authorization", "Bearer " + api_key);
        return h;
    }

    json request(const ModelCall& call, const std::string& remote_model) const override {
        json body{{"model", remote_model}, {"messages", call.messages}, {"temperature", call.temperature}};
        if (call.seed) body["seed"] = *call.seed;
        if (call.max_output) body["max_tokens"] = *call.max_output;
        return body;
    }

    ModelReply parse(const json& r) const override {
        ModelReply reply;
        const auto& choices = r.at("choices");
        if (!choices.is_array() || choices.empty()) {
            throw Error(Errc::BackendUnavailable, "chat completion response has no choices");
        }
        const auto& content = choices.at(0).at("message").at("content");
        reply.text = content.is_string() ? content.get<std::string>() : std::string{};
        if (auto u = r.find("usage"); u != r.end() && u->is_object()) {
            reply.usage.input = u->value("prompt_tokens", std::int64_t{0});
            reply.usage.output = u->value("completion_tokens", std::int64_t{0});
        }
        return reply;
    }
};

class AnthropicAdapter final : public ChatAdapter {
public:
    std::string path() const override { return "/v1/messages"; }

    HeaderList headers(const std::string& api_key) const override {
        HeaderList h{{"anthropic-version", "2023-06-01"}};
        if (!api_key.empty()) h.emplace_back("x-api-key", api_key);
        return h;
    }

    json request(const ModelCall& call, const std::string& remote_model) const override {
        json messages = json::array();
        std::string system;
        for (const auto& m : call.messages) {
            if (m.role == Role::System) {
                if (!system.empty()) system += "\n\n";
                system += m.content;
            } else {
                messages.push_back(m);
            }
        }
        json body{{"model", remote_model},
                  {"messages", std::move(messages)},
                  {"temperature", call.temperature},
                  {"max_tokens", call.max_output.value_or(8192)}};
        if (!system.empty()) body["system"] = system;
        return body;
    }

    ModelReply parse(const json& r) const override {
        ModelReply reply;
        for (const auto& block : r.at("content")) {
            if (block.value("type", std::string{}) == "text") reply.text += block.value("text", std::string{});
        }
        if (auto u = r.find("usage"); u != r.end() && u->is_object()) {
            reply.usage.input = u->value("input_tokens", std::int64_t{0});
            reply.usage.output = u->value("output_tokens", std::int64_t{0});
        }
        return reply;
    }
};

}  // namespace

std::unique_ptr<ChatAdapter> make_adapter(const std::string& provider) {
    if (provider == "openai" || provider == "openai-compatible") return std::make_unique<OpenAiAdapter>();
    if (provider == "anthropic") return std::make_unique<AnthropicAdapter>();
    throw Error(Errc::InvalidInput, fmt::format("unknown provider '{}'", provider));
}

std::string provider_key_from_env(const std::string& provider) {
    std::string name;
    for (char c : provider) {
        name.push_back(std::isalnum(static_cast<unsigned char>(c))
                           ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                           : '_');
    }
    const char* v = std::getenv(fmt::format("UQ_PROVIDER_{}_KEY", name).c_str());
    return v ? std::string(v) : std::string{};
}

HttpChatBackend::HttpChatBackend(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)), adapter_(make_adapter(endpoint_.provider)) {
    if (endpoint_.base_url.empty()) {
        throw Error(Errc::InvalidInput, "HTTP backend requires a base_url");
    }
}

ModelReply HttpChatBackend::complete(const ModelCall& call) {
    httplib::Client client(endpoint_.base_url);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(endpoint_.timeout);
    client.set_write_timeout(std::chrono::seconds(30));

    httplib::Headers headers;
    for (const auto& [k, v] : adapter_->headers(endpoint_.api_key)) headers.emplace(k, v);
    const auto remote = endpoint_.remote_model.empty() ? call.model_id : endpoint_.remote_model;
    const auto body = adapter_->request(call, remote).dump();

    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(adapter_->path(), headers, body, "application/json");
    if (!res) {
        throw TransportError(fmt::format("request to {} failed: {}", endpoint_.base_url,
                                         httplib::to_string(res.error())),
                             0, true);
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransportError(fmt::format("{} returned HTTP {}", endpoint_.base_url, res->status),
                             res->status, true);
    }
    if (res->status >= 400) {
        throw TransportError(fmt::format("{} returned HTTP {}: {}", endpoint_.base_url, res->status,
                                         res->body.substr(0, 200)),
                             res->status, false);
    }
    json parsed;
    try {
        parsed = json::parse(res->body);
    } catch (const json::exception& e) {
        throw TransportError(fmt::format("malformed response body: {}", e.what()), res->status, true);
    }
    ModelReply reply;
    try {
        reply = adapter_->parse(parsed);
    } catch (const json::exception& e) {
        throw TransportError(fmt::format("unexpected response shape: {}", e.what()), res->status, false);
    }
    reply.latency_ms = std::max<std::int64_t>(
        1, std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
               .count());
    return reply;
}

std::vector<ModelRegistryEntry> parse_model_registry(const json& models) {
    std::vector<ModelRegistryEntry> out;
    if (!models.is_object()) throw Error(Errc::InvalidInput, "`models` must be an object");
    for (const auto& [id, cfg] : models.items()) {
        ModelRegistryEntry e;
        e.model_id = id;
        e.endpoint.provider = cfg.value("provider", std::string{"openai"});
        e.endpoint.base_url = cfg.value("base_url", std::string{});
        e.endpoint.remote_model = cfg.value("remote_model", id);
        e.endpoint.timeout = std::chrono::seconds(cfg.value("timeout_s", 120));
        const auto key_provider = cfg.value("credential", e.endpoint.provider);
        e.endpoint.api_key = provider_key_from_env(key_provider);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace uq::gateway
