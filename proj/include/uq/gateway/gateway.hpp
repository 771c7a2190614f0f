#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>

#include "uq/gateway/backend.hpp"
#include "uq/gateway/ledger.hpp"

namespace uq::gateway {

inline constexpr double kJudgeTemperature = 0.0;
inline constexpr double kAnswerTemperature = 0.3;

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{500};
    std::chrono::milliseconds max_delay{30'000};
    bool jitter = true;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct GatewayOptions {
    bool cache = true;
    std::optional<std::filesystem::path> cache_dir;
    RetryPolicy retry;
    BudgetCaps caps;
    Sleeper sleep;  // defaults to std::this_thread::sleep_for
    std::uint64_t jitter_seed = 0;
};

// Uniform entry point for every model call: routes by model id, serves
// repeated identical calls from a content-addressed cache, retries transport
// failures with exponential backoff, and keeps the budget ledger.
class Gateway {
public:
    explicit Gateway(GatewayOptions options = {});

    void register_model(const std::string& model_id, std::shared_ptr<Backend> backend);
    // Backend used for any model id without an explicit registration.
    void register_fallback(std::shared_ptr<Backend> backend);
    bool has_model(const std::string& model_id) const;

    ModelReply complete(const ModelCall& call);

    BudgetLedger ledger() const;
    std::int64_t cache_hits() const;
    std::int64_t retries() const;

private:
    std::shared_ptr<Backend> resolve(const std::string& model_id) const;
    void reserve_budget();
    void release_budget();
    std::optional<ModelReply> cache_lookup(const std::string& key);
    void cache_store(const std::string& key, const ModelReply& reply);
    std::chrono::milliseconds backoff_delay(int attempt);

    GatewayOptions options_;
    std::map<std::string, std::shared_ptr<Backend>> backends_;
    std::shared_ptr<Backend> fallback_;

    mutable std::mutex mutex_;
    BudgetLedger ledger_;
    std::int64_t in_flight_ = 0;
    std::int64_t cache_hits_ = 0;
    std::int64_t retries_ = 0;
    std::unordered_map<std::string, ModelReply> cache_;
    std::mt19937_64 jitter_rng_;
};

}  // namespace uq::gateway
