#pragma once

#include <string>
#include <string_view>

#include "uq/core/types.hpp"

namespace uq {

// RFC 3339, always rendered in UTC with a trailing `Z`.
std::string format_rfc3339(Timestamp t);

// Accepts `YYYY-MM-DDTHH:MM:SS[.frac](Z|+HH:MM|-HH:MM)` and a bare date.
// Fractional seconds are truncated. Throws Error(InvalidInput).
Timestamp parse_rfc3339(std::string_view text);

Timestamp from_unix(std::int64_t seconds);
std::int64_t to_unix(Timestamp t);

}  // namespace uq
