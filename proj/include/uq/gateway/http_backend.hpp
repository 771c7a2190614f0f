#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "uq/core/json.hpp"
#include "uq/gateway/backend.hpp"

namespace uq::gateway {

using HeaderList = std::vector<std::pair<std::string, std::string>>;

// Translates between the gateway's call shape and one provider's JSON wire
// format.
class ChatAdapter {
public:
    virtual ~ChatAdapter() = default;
    virtual std::string path() const = 0;
    virtual HeaderList headers(const std::string& api_key) const = 0;
    virtual json request(const ModelCall& call, const std::string& remote_model) const = 0;
    virtual ModelReply parse(const json& response) const = 0;
};

// "openai" (chat-completions shape, also used by most compatible servers) and
// "anthropic" (messages shape).
std::unique_ptr<ChatAdapter> make_adapter(const std::string& provider);

struct HttpEndpoint {
    std::string provider = "openai";
    std::string base_url;
    std::string remote_model;
    std::string api_key;
    std::chrono::seconds timeout{120};
};

// Reads `UQ_PROVIDER_<NAME>_KEY` with NAME upper-cased; empty when unset.
std::string provider_key_from_env(const std::string& provider);

class HttpChatBackend final : public Backend {
public:
    explicit HttpChatBackend(HttpEndpoint endpoint);
    ModelReply complete(const ModelCall& call) override;

private:
    HttpEndpoint endpoint_;
    std::unique_ptr<ChatAdapter> adapter_;
};

struct ModelRegistryEntry {
    std::string model_id;
    HttpEndpoint endpoint;
};

// Parses the `models` object of a config file:
//   {"o3": {"provider": "openai", "base_url": "https://api.openai.com",
//           "remote_model": "o3", "timeout_s": 300}}
std::vector<ModelRegistryEntry> parse_model_registry(const json& models);

}  // namespace uq::gateway
