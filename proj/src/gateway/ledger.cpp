#include "uq/gateway/ledger.hpp"

namespace uq::gateway {

void BudgetLedger::record(const std::string& model_id, std::int64_t input_tokens,
                          std::int64_t output_tokens) {
    const LedgerEntry e{1, input_tokens, output_tokens};
    totals_ += e;
    per_model_[model_id] += e;
}

void BudgetLedger::merge(const BudgetLedger& other) {
    totals_ += other.totals_;
    for (const auto& [model, entry] : other.per_model_) per_model_[model] += entry;
}

void to_json(json& j, const LedgerEntry& e) {
    j = json{{"calls", e.calls}, {"input_tokens", e.input_tokens}, {"output_tokens", e.output_tokens}};
}

void from_json(const json& j, LedgerEntry& e) {
    e.calls = j.value("calls", std::int64_t{0});
    e.input_tokens = j.value("input_tokens", std::int64_t{0});
    e.output_tokens = j.value("output_tokens", std::int64_t{0});
}

void to_json(json& j, const BudgetLedger& l) {
    j = l.totals();
    j["per_model"] = l.per_model();
}

void from_json(const json& j, BudgetLedger& l) {
    l = BudgetLedger{};
    if (auto it = j.find("per_model"); it != j.end()) {
        BudgetLedger rebuilt;
        for (const auto& [model, entry] : it->items()) {
            const auto e = entry.get<LedgerEntry>();
            BudgetLedger one;
            // Rebuild through merge so totals stay consistent with entries.
            one.totals_ = e;
            one.per_model_[model] = e;
            rebuilt.merge(one);
        }
        l = std::move(rebuilt);
    }
}

void to_json(json& j, const BudgetCaps& c) {
    j = json::object();
    if (c.max_calls) j["max_calls"] = *c.max_calls;
    if (c.max_input_tokens) j["max_input_tokens"] = *c.max_input_tokens;
    if (c.max_output_tokens) j["max_output_tokens"] = *c.max_output_tokens;
}

void from_json(const json& j, BudgetCaps& c) {
    c = BudgetCaps{};
    if (j.contains("max_calls")) c.max_calls = j.at("max_calls").get<std::int64_t>();
    if (j.contains("max_input_tokens")) c.max_input_tokens = j.at("max_input_tokens").get<std::int64_t>();
    if (j.contains("max_output_tokens")) c.max_output_tokens = j.at("max_output_tokens").get<std::int64_t>();
}

}  // namespace uq::gateway
