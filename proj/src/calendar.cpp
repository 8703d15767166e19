#include "clcrc/calendar.hpp"

#include <cctype>
#include <algorithm>
#include <cstdio>

#include "clcrc/errors.hpp"

namespace clcrc {

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(int year, unsigned month, unsigned day) {
  year -= month <= 2 ? 1 : 0;
  const std::int64_t era = (year >= 0 ? year : year - 399) / 400;
  const auto yoe = static_cast<unsigned>(year - era * 400);
  const unsigned doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

namespace {

struct Civil {
  int year;
  unsigned month;
  unsigned day;
};

Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<int>(y + (m <= 2 ? 1 : 0)), m, d};
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

UnixSeconds parse_date(std::string_view text) {
  text = trim(text);
  int y = 0, m = 0, d = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-' || !read_int(text, 0, 4, y) ||
      !read_int(text, 5, 2, m) || !read_int(text, 8, 2, d) || m < 1 || m > 12 || d < 1 ||
      d > 31) {
    throw DataError("malformed date: '" + std::string(text) + "'");
  }
  return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d)) *
         kSecondsPerDay;
}

UnixSeconds parse_iso8601(std::string_view text) {
  text = trim(text);
  const UnixSeconds day = parse_date(text.substr(0, std::min<std::size_t>(10, text.size())));
  if (text.size() == 10) return day;
  if (text[10] != 'T' && text[10] != ' ') {
    throw DataError("malformed timestamp: '" + std::string(text) + "'");
  }
  int hh = 0, mm = 0, ss = 0;
  if (!read_int(text, 11, 2, hh) || text.size() < 16 || text[13] != ':' ||
      !read_int(text, 14, 2, mm)) {
    throw DataError("malformed timestamp: '" + std::string(text) + "'");
  }
  std::size_t pos = 16;
  if (pos < text.size() && text[pos] == ':') {
    if (!read_int(text, pos + 1, 2, ss)) {
      throw DataError("malformed timestamp: '" + std::string(text) + "'");
    }
    pos += 3;
  }
  if (pos < text.size() && text.substr(pos) != "Z") {
    throw DataError("unsupported timestamp suffix: '" + std::string(text) + "'");
  }
  if (hh > 24 || mm > 59 || ss > 60) {
    throw DataError("timestamp out of range: '" + std::string(text) + "'");
  }
  return day + hh * kSecondsPerHour + mm * 60 + ss;
}

std::string format_date(UnixSeconds t) {
  const Civil c = civil_from_days(floor_to_day(t) / kSecondsPerDay);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
  return buf;
}

std::string format_iso8601(UnixSeconds t) {
  const UnixSeconds day = floor_to_day(t);
  const UnixSeconds rem = t - day;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lldZ", format_date(day).c_str(),
                static_cast<long long>(rem / 3600), static_cast<long long>(rem % 3600 / 60),
                static_cast<long long>(rem % 60));
  return buf;
}

int day_of_week(UnixSeconds t) {
  // 1970-01-01 was a Thursday.
  const std::int64_t days = floor_to_day(t) / kSecondsPerDay;
  return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

}  // namespace clcrc
