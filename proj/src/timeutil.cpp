#include "loopclean/timeutil.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "loopclean/errors.hpp"

namespace loopclean {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int weekday_of_day(std::int64_t days) {
  return static_cast<int>(((days + 4) % 7 + 7) % 7);  // 1970-01-01 was a Thursday
}

namespace {

bool parse_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  const char* first = s.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc{} && ptr == first + len;
}

int days_in_month(int year, int month) {
  static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[static_cast<std::size_t>(month - 1)];
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  int year = 0, month = 0, day = 0;
  if (text.size() < 10) return std::nullopt;
  if (!parse_int(text, 0, 4, year) || text[4] != '-' || !parse_int(text, 5, 2, month) ||
      text[7] != '-' || !parse_int(text, 8, 2, day)) {
    return std::nullopt;
  }
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) return std::nullopt;

  int hour = 0, minute = 0, second = 0;
  std::size_t pos = 10;
  if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
    ++pos;
    if (!parse_int(text, pos, 2, hour) || pos + 2 >= text.size() || text[pos + 2] != ':' ||
        !parse_int(text, pos + 3, 2, minute)) {
      return std::nullopt;
    }
    pos += 5;
    if (pos < text.size() && text[pos] == ':') {
      if (!parse_int(text, pos + 1, 2, second)) return std::nullopt;
      pos += 3;
    }
    if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
  }

  std::int64_t zone_offset = 0;
  if (pos < text.size()) {
    if (text[pos] == 'Z') {
      ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
      const int sign = text[pos] == '+' ? 1 : -1;
      int oh = 0, om = 0;
      if (!parse_int(text, pos + 1, 2, oh) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
          !parse_int(text, pos + 4, 2, om)) {
        return std::nullopt;
      }
      if (oh > 14 || om > 59) return std::nullopt;
      zone_offset = sign * (oh * 3600LL + om * 60LL);
      pos += 6;
    }
  }
  if (pos != text.size()) return std::nullopt;

  const std::int64_t days = days_from_civil(year, month, day);
  return days * 86400 + hour * 3600LL + minute * 60LL + second - zone_offset;
}

std::string format_iso8601(Timestamp t) {
  const std::int64_t days = floor_div(t, 86400);
  const std::int64_t sod = t - days * 86400;
  const CivilDate d = civil_from_days(days);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year, d.month, d.day,
                static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                static_cast<int>(sod % 60));
  return buf;
}

std::string format_iso8601_minute(Timestamp t) {
  const std::int64_t days = floor_div(t, 86400);
  const std::int64_t sod = t - days * 86400;
  const CivilDate d = civil_from_days(days);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", d.year, d.month, d.day,
                static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60));
  return buf;
}

TimeZone TimeZone::utc() { return TimeZone{}; }

TimeZone TimeZone::parse(std::string_view spec) {
  TimeZone tz;
  tz.name_ = std::string(spec);
  if (spec == "UTC" || spec.empty()) {
    tz.name_ = "UTC";
    return tz;
  }
  if (spec == "US/Pacific" || spec == "America/Los_Angeles") {
    tz.kind_ = Kind::UsPacific;
    return tz;
  }
  std::string_view rest = spec;
  if (rest.substr(0, 3) == "UTC") rest.remove_prefix(3);
  if (!rest.empty() && (rest[0] == '+' || rest[0] == '-')) {
    const int sign = rest[0] == '+' ? 1 : -1;
    int oh = 0, om = 0;
    const bool ok = rest.size() == 6 && rest[3] == ':' && parse_int(rest, 1, 2, oh) &&
                    parse_int(rest, 4, 2, om) && oh <= 14 && om <= 59;
    if (ok) {
      tz.fixed_offset_ = sign * (oh * 3600LL + om * 60LL);
      return tz;
    }
  }
  throw Error("unknown timezone: " + std::string(spec));
}

namespace {

// Nth Sunday of a month, as days since the epoch.
std::int64_t nth_sunday(int year, int month, int n) {
  const std::int64_t first = days_from_civil(year, month, 1);
  const int wd = weekday_of_day(first);
  return first + (7 - wd) % 7 + 7LL * (n - 1);
}

}  // namespace

std::int64_t TimeZone::offset_at(Timestamp utc) const {
  if (kind_ == Kind::Fixed) return fixed_offset_;
  // US/Pacific: PST is UTC-8, PDT is UTC-7. DST runs from the second Sunday
  // of March 02:00 local standard (10:00 UTC) to the first Sunday of
  // November 02:00 local daylight (09:00 UTC). The UTC year is safe for the
  // rule lookup: transitions sit months away from the year boundary.
  const int year = civil_from_days(floor_div(utc, 86400)).year;
  const Timestamp dst_begin = nth_sunday(year, 3, 2) * 86400 + 10 * 3600;
  const Timestamp dst_end = nth_sunday(year, 11, 1) * 86400 + 9 * 3600;
  return (utc >= dst_begin && utc < dst_end) ? -7 * 3600 : -8 * 3600;
}

int TimeZone::local_hour(Timestamp utc) const {
  const Timestamp local = to_local(utc);
  return static_cast<int>(floor_div(local, 3600) - floor_div(local, 86400) * 24);
}

std::int64_t TimeZone::local_day(Timestamp utc) const { return floor_div(to_local(utc), 86400); }

int TimeZone::local_weekday(Timestamp utc) const { return weekday_of_day(local_day(utc)); }

}  // namespace loopclean
