#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pdm::detail {

// Days since 1970-01-01 for a proleptic Gregorian civil date
// (Howard Hinnant's days_from_civil).
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct civil_date {
    int year;
    unsigned month;
    unsigned day;
};

inline civil_date civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), m, d};
}

// Parses a strict YYYY-MM-DD date into days since 1970-01-01.
inline std::int64_t parse_iso_date(std::string_view s) {
    auto fail = [&] { throw std::invalid_argument("invalid ISO date: '" + std::string(s) + "'"); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
    auto num = [&](std::string_view part) -> int {
        int v = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc{} || p != part.data() + part.size()) fail();
        return v;
    };
    const int y = num(s.substr(0, 4));
    const int m = num(s.substr(5, 2));
    const int d = num(s.substr(8, 2));
    if (m < 1 || m > 12 || d < 1 || d > 31) fail();
    const std::int64_t z = days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
    const civil_date back = civil_from_days(z);
    if (back.year != y || back.month != static_cast<unsigned>(m) ||
        back.day != static_cast<unsigned>(d))
        fail();  // e.g. Feb 30
    return z;
}

inline std::string format_iso_date(std::int64_t days_since_epoch) {
    const civil_date c = civil_from_days(days_since_epoch);
    char buf[11];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
    return std::string(buf);
}

}  // namespace pdm::detail
