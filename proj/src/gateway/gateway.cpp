#include "uq/gateway/gateway.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "uq/core/error.hpp"
#include "uq/core/jsonl.hpp"

namespace uq::gateway {

Gateway::Gateway(GatewayOptions options)
    : options_(std::move(options)), jitter_rng_(options_.jitter_seed) {
    if (!options_.sleep) {
        options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
    if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
}

void Gateway::register_model(const std::string& model_id, std::shared_ptr<Backend> backend) {
    backends_[model_id] = std::move(backend);
}

void Gateway::register_fallback(std::shared_ptr<Backend> backend) { fallback_ = std::move(backend); }

bool Gateway::has_model(const std::string& model_id) const {
    return backends_.count(model_id) > 0 || fallback_ != nullptr;
}

std::shared_ptr<Backend> Gateway::resolve(const std::string& model_id) const {
    if (auto it = backends_.find(model_id); it != backends_.end()) return it->second;
    if (fallback_) return fallback_;
    throw Error(Errc::InvalidModel, fmt::format("model '{}' is not registered", model_id));
}

void Gateway::reserve_budget() {
    std::lock_guard lock(mutex_);
    const auto& t = ledger_.totals();
    const auto& caps = options_.caps;
    if (caps.max_calls && t.calls + in_flight_ >= *caps.max_calls) {
        throw Error(Errc::BudgetExceeded,
                    fmt::format("call budget of {} exhausted", *caps.max_calls));
    }
    if (caps.max_input_tokens && t.input_tokens >= *caps.max_input_tokens) {
        throw Error(Errc::BudgetExceeded,
                    fmt::format("input token budget of {} exhausted", *caps.max_input_tokens));
    }
    if (caps.max_output_tokens && t.output_tokens >= *caps.max_output_tokens) {
        throw Error(Errc::BudgetExceeded,
                    fmt::format("output token budget of {} exhausted", *caps.max_output_tokens));
    }
    ++in_flight_;
}

void Gateway::release_budget() {
    std::lock_guard lock(mutex_);
    --in_flight_;
}

std::optional<ModelReply> Gateway::cache_lookup(const std::string& key) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            ++cache_hits_;
            return it->second;
        }
    }
    if (!options_.cache_dir) return std::nullopt;
    const auto path = *options_.cache_dir / key.substr(0, 2) / (key + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
        const auto j = json::parse(read_file(path));
        ModelReply reply;
        reply.text = j.at("text").get<std::string>();
        reply.usage = j.at("usage").get<TokenUsage>();
        std::lock_guard lock(mutex_);
        cache_.emplace(key, reply);
        ++cache_hits_;
        return reply;
    } catch (const std::exception&) {
        return std::nullopt;  // unreadable entries are treated as misses
    }
}

void Gateway::cache_store(const std::string& key, const ModelReply& reply) {
    {
        std::lock_guard lock(mutex_);
        cache_.emplace(key, reply);
    }
    if (!options_.cache_dir) return;
    const auto path = *options_.cache_dir / key.substr(0, 2) / (key + ".json");
    const json j{{"text", reply.text}, {"usage", reply.usage}};
    write_file_atomic(path, j.dump());
}

std::chrono::milliseconds Gateway::backoff_delay(int attempt) {
    const auto& r = options_.retry;
    const double scaled = static_cast<double>(r.base_delay.count()) * static_cast<double>(1LL << std::min(attempt, 20));
    double delay = std::min(scaled, static_cast<double>(r.max_delay.count()));
    if (r.jitter) {
        std::lock_guard lock(mutex_);
        std::uniform_real_distribution<double> u(0.5, 1.0);
        delay *= u(jitter_rng_);
    }
    return std::chrono::milliseconds(static_cast<std::int64_t>(delay));
}

ModelReply Gateway::complete(const ModelCall& call) {
    if (call.messages.empty()) {
        throw Error(Errc::InvalidInput, "model call has no messages");
    }
    if (call.temperature < 0.0) {
        throw Error(Errc::InvalidInput, "temperature must be ≥ 0");
    }
    auto backend = resolve(call.model_id);

    std::string key;
    if (options_.cache) {
        key = cache_key(call);
        if (auto hit = cache_lookup(key)) {
            hit->cached = true;
            hit->latency_ms = 0;
            return *hit;
        }
    }

    reserve_budget();
    std::string last_error;
    for (int attempt = 0; attempt < options_.retry.max_attempts; ++attempt) {
        if (attempt > 0) {
            {
                std::lock_guard lock(mutex_);
                ++retries_;
            }
            options_.sleep(backoff_delay(attempt - 1));
        }
        try {
            const auto start = std::chrono::steady_clock::now();
            ModelReply reply = backend->complete(call);
            reply.cached = false;
            if (reply.latency_ms == 0) {
                reply.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                       std::chrono::steady_clock::now() - start)
                                       .count();
            }
            {
                std::lock_guard lock(mutex_);
                --in_flight_;
                ledger_.record(call.model_id, reply.usage.input, reply.usage.output);
            }
            if (options_.cache) cache_store(key, reply);
            return reply;
        } catch (const TransportError& e) {
            last_error = e.what();
            if (!e.retryable()) break;
        } catch (...) {
            release_budget();
            throw;
        }
    }
    release_budget();
    throw Error(Errc::BackendUnavailable,
                fmt::format("model '{}' unavailable: {}", call.model_id, last_error));
}

BudgetLedger Gateway::ledger() const {
    std::lock_guard lock(mutex_);
    return ledger_;
}

std::int64_t Gateway::cache_hits() const {
    std::lock_guard lock(mutex_);
    return cache_hits_;
}

std::int64_t Gateway::retries() const {
    std::lock_guard lock(mutex_);
    return retries_;
}

}  // namespace uq::gateway
