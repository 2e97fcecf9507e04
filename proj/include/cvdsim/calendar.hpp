#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "cvdsim/errors.hpp"

namespace cvdsim {

struct YearMonth {
    int year = 0;
    int month = 0;  // 1..12

    bool operator==(const YearMonth&) const = default;
    auto operator<=>(const YearMonth&) const = default;
};

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-calendar algorithm; exact integer arithmetic).
constexpr std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

inline constexpr std::int64_t kEpoch2017 = days_from_civil(2017, 1, 1);

/// Calendar month of (2017-01-01 + floor(years * 365.25) days), "YYYY-MM".
inline YearMonth year_month_from_years(double years) {
    const auto offset = static_cast<std::int64_t>(std::floor(years * 365.25));
    int y = 0, m = 0, d = 0;
    civil_from_days(kEpoch2017 + offset, y, m, d);
    return {y, m};
}

/// Continuous years from 2017-01-01 to the 15th of the given month.
inline double years_from_year_month(const YearMonth& ym) {
    const std::int64_t days = days_from_civil(ym.year, ym.month, 15) - kEpoch2017;
    return static_cast<double>(days) / 365.25;
}

inline std::string format_year_month(const YearMonth& ym) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", ym.year, ym.month);
    return buf;
}

/// Strict "YYYY-MM" parse; anything else is a ParseError.
inline YearMonth parse_year_month(std::string_view s) {
    const auto bad = [&] {
        return ParseError("malformed year-month '" + std::string(s) + "', expected YYYY-MM");
    };
    if (s.size() != 7 || s[4] != '-') throw bad();
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u}) {
        if (s[i] < '0' || s[i] > '9') throw bad();
    }
    const int year = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    if (month < 1 || month > 12) throw bad();
    return {year, month};
}

}  // namespace cvdsim
