#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "uq/core/json.hpp"

namespace uq::gateway {

struct LedgerEntry {
    std::int64_t calls = 0;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;

    LedgerEntry& operator+=(const LedgerEntry& o) {
        calls += o.calls;
        input_tokens += o.input_tokens;
        output_tokens += o.output_tokens;
        return *this;
    }
    bool operator==(const LedgerEntry&) const = default;
};

// Totals always equal the sum of the per-model entries; both are updated in
// `record` only.
class BudgetLedger {
public:
    void record(const std::string& model_id, std::int64_t input_tokens, std::int64_t output_tokens);
    void merge(const BudgetLedger& other);

    const LedgerEntry& totals() const { return totals_; }
    const std::map<std::string, LedgerEntry>& per_model() const { return per_model_; }
    std::int64_t calls() const { return totals_.calls; }

    bool operator==(const BudgetLedger&) const = default;

private:
    friend void from_json(const json& j, BudgetLedger& l);

    LedgerEntry totals_;
    std::map<std::string, LedgerEntry> per_model_;
};

struct BudgetCaps {
    std::optional<std::int64_t> max_calls;
    std::optional<std::int64_t> max_input_tokens;
    std::optional<std::int64_t> max_output_tokens;
};

void to_json(json& j, const LedgerEntry& e);
void from_json(const json& j, LedgerEntry& e);
void to_json(json& j, const BudgetLedger& l);
void from_json(const json& j, BudgetLedger& l);
void to_json(json& j, const BudgetCaps& c);
void from_json(const json& j, BudgetCaps& c);

}  // namespace uq::gateway
