#pragma once

#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "t20/util.hpp"

namespace t20 {

/// ISO-8601 calendar date. Time-of-day is never modeled; match ordering within
/// a day is unavailable upstream, so "before" always means strictly earlier
/// calendar date.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;

  bool valid() const {
    if (month < 1 || month > 12 || day < 1) return false;
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dmax = kDays[month - 1];
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) dmax = 29;
    return day <= dmax;
  }

  /// Days since 1970-01-01 (proleptic Gregorian).
  long serial() const {
    long y = year;
    if (month <= 2) --y;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
  }

  std::string to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
  }

  static Date from_serial(long days) {
    long z = days + 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
  }
};

/// Parses "YYYY-MM-DD". ParseError on malformed text, ValidationError on an
/// impossible calendar date.
inline Date parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw ParseError("date must be YYYY-MM-DD, got '" + std::string(s) + "'");
  Date d;
  d.year = static_cast<int>(parse_long(s.substr(0, 4), "date year"));
  d.month = static_cast<int>(parse_long(s.substr(5, 2), "date month"));
  d.day = static_cast<int>(parse_long(s.substr(8, 2), "date day"));
  if (!d.valid()) throw ValidationError("invalid calendar date '" + std::string(s) + "'");
  return d;
}

}  // namespace t20
