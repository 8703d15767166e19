#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace clcrc {

/// Seconds since 1970-01-01T00:00:00Z.
using UnixSeconds = std::int64_t;

inline constexpr UnixSeconds kSecondsPerHour = 3600;
inline constexpr UnixSeconds kSecondsPerDay = 86400;

/// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

/// Parses `YYYY-MM-DD[T ]HH:MM[:SS][Z]`. Throws DataError on malformed input.
UnixSeconds parse_iso8601(std::string_view text);

/// Parses `YYYY-MM-DD` and returns midnight of that day.
UnixSeconds parse_date(std::string_view text);

std::string format_iso8601(UnixSeconds t);
std::string format_date(UnixSeconds t);

/// 0 = Monday ... 6 = Sunday.
int day_of_week(UnixSeconds t);

inline UnixSeconds floor_to_day(UnixSeconds t) {
  UnixSeconds d = t / kSecondsPerDay;
  if (t % kSecondsPerDay < 0) --d;
  return d * kSecondsPerDay;
}

}  // namespace clcrc
