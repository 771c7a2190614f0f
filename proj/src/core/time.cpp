#include "uq/core/time.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "uq/core/error.hpp"

namespace uq {

namespace {

using namespace std::chrono;

int read_int(std::string_view text, std::size_t& pos, std::size_t digits) {
    if (pos + digits > text.size()) {
        throw Error(Errc::InvalidInput, fmt::format("truncated timestamp '{}'", text));
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + digits, value);
    if (ec != std::errc() || ptr != text.data() + pos + digits) {
        throw Error(Errc::InvalidInput, fmt::format("malformed timestamp '{}'", text));
    }
    pos += digits;
    return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
    if (pos >= text.size() || text[pos] != c) {
        throw Error(Errc::InvalidInput, fmt::format("malformed timestamp '{}'", text));
    }
    ++pos;
}

}  // namespace

std::string format_rfc3339(Timestamp t) {
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                       hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

Timestamp parse_rfc3339(std::string_view text) {
    std::size_t pos = 0;
    const int y = read_int(text, pos, 4);
    expect(text, pos, '-');
    const int mo = read_int(text, pos, 2);
    expect(text, pos, '-');
    const int d = read_int(text, pos, 2);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw Error(Errc::InvalidInput, fmt::format("invalid date in '{}'", text));
    }
    Timestamp result = sys_days{ymd};
    if (pos == text.size()) {
        return result;
    }
    if (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ') {
        throw Error(Errc::InvalidInput, fmt::format("malformed timestamp '{}'", text));
    }
    ++pos;
    const int h = read_int(text, pos, 2);
    expect(text, pos, ':');
    const int mi = read_int(text, pos, 2);
    expect(text, pos, ':');
    const int s = read_int(text, pos, 2);
    if (h > 23 || mi > 59 || s > 60) {
        throw Error(Errc::InvalidInput, fmt::format("invalid time in '{}'", text));
    }
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
    }
    result += hours{h} + minutes{mi} + seconds{s};
    if (pos == text.size()) {
        throw Error(Errc::InvalidInput, fmt::format("timestamp '{}' lacks a UTC offset", text));
    }
    if (text[pos] == 'Z' || text[pos] == 'z') {
        ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
        const int sign = text[pos] == '+' ? 1 : -1;
        ++pos;
        const int oh = read_int(text, pos, 2);
        expect(text, pos, ':');
        const int om = read_int(text, pos, 2);
        result -= sign * (hours{oh} + minutes{om});
    } else {
        throw Error(Errc::InvalidInput, fmt::format("malformed timestamp '{}'", text));
    }
    if (pos != text.size()) {
        throw Error(Errc::InvalidInput, fmt::format("trailing characters in '{}'", text));
    }
    return result;
}

Timestamp from_unix(std::int64_t s) { return Timestamp{seconds{s}}; }

std::int64_t to_unix(Timestamp t) { return t.time_since_epoch().count(); }

}  // namespace uq
