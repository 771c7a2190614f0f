#include "uq/strategy/check.hpp"

#include <string>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq::strategy {

std::string_view slug(CheckKind k) noexcept {
    switch (k) {
        case CheckKind::Correctness: return "c";
        case CheckKind::FactLogic: return "flc";
        case CheckKind::CycleConsistency: return "cc";
        case CheckKind::VanillaBaseline: return "vanilla";
    }
    return "c";
}

CheckKind parse_check(std::string_view s) {
    for (auto k : kAllChecks) {
        if (slug(k) == s) return k;
    }
    if (s == "correctness") return CheckKind::Correctness;
    if (s == "fact_logic") return CheckKind::FactLogic;
    if (s == "cycle_consistency") return CheckKind::CycleConsistency;
    throw Error(Errc::InvalidInput, fmt::format("unknown check '{}'", s));
}

std::string_view marker_label(CheckKind k) noexcept {
    switch (k) {
        case CheckKind::Correctness: return "Accepted";
        case CheckKind::FactLogic: return "No Factual Errors";
        case CheckKind::CycleConsistency: return "Relevant";
        case CheckKind::VanillaBaseline: return "Accepted";
    }
    return "Accepted";
}

std::string_view template_name(CheckKind k) noexcept {
    switch (k) {
        case CheckKind::Correctness: return "correctness";
        case CheckKind::FactLogic: return "fact_logic";
        case CheckKind::CycleConsistency: return "cycle_consistency";
        case CheckKind::VanillaBaseline: return "vanilla";
    }
    return "correctness";
}

}  // namespace uq::strategy
