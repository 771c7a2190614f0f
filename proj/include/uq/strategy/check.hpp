#pragma once

#include <array>
#include <string_view>

namespace uq::strategy {

enum class CheckKind { Correctness, FactLogic, CycleConsistency, VanillaBaseline };

inline constexpr std::array<CheckKind, 4> kAllChecks = {
    CheckKind::Correctness, CheckKind::FactLogic, CheckKind::CycleConsistency,
    CheckKind::VanillaBaseline};

// Short names used in strategy text: c, flc, cc, vanilla.
std::string_view slug(CheckKind k) noexcept;
CheckKind parse_check(std::string_view slug);

// The label the prompt asks the judge to put before its [[Y]]/[[N]] marker.
std::string_view marker_label(CheckKind k) noexcept;

// Name of the template in the prompt pack.
std::string_view template_name(CheckKind k) noexcept;

}  // namespace uq::strategy
