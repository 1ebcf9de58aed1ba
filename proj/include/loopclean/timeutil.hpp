#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace loopclean {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
};

std::int64_t floor_div(std::int64_t a, std::int64_t b);

// Proleptic Gregorian calendar <-> days since 1970-01-01.
std::int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(std::int64_t days);

// 0 = Sunday .. 6 = Saturday.
int weekday_of_day(std::int64_t days);

// Accepts "YYYY-MM-DD", optionally followed by "T" or " " and "HH:MM[:SS]",
// optionally followed by "Z" or "+HH:MM"/"-HH:MM". A bare date/time is UTC.
std::optional<Timestamp> parse_iso8601(std::string_view text);

std::string format_iso8601(Timestamp t);         // 2015-05-06T14:00:00Z
std::string format_iso8601_minute(Timestamp t);  // 2015-05-06T14:00

/// Timezone used to map UTC instants to local calendar days and hours.
///
/// Supported specs: "UTC", fixed offsets ("UTC+05:30", "-08:00"), and
/// "US/Pacific" (alias "America/Los_Angeles"), which applies the post-2007
/// United States daylight-saving rules. There is no dependency on a system
/// tz database.
class TimeZone {
 public:
  TimeZone() = default;

  static TimeZone utc();
  static TimeZone parse(std::string_view spec);  // throws Error on unknown spec

  // Offset east of UTC, in seconds, at the given instant.
  std::int64_t offset_at(Timestamp utc) const;

  Timestamp to_local(Timestamp utc) const { return utc + offset_at(utc); }

  const std::string& name() const { return name_; }

  int local_hour(Timestamp utc) const;
  std::int64_t local_day(Timestamp utc) const;   // local days since epoch
  int local_weekday(Timestamp utc) const;        // 0 = Sunday .. 6 = Saturday

 private:
  enum class Kind { Fixed, UsPacific };
  Kind kind_ = Kind::Fixed;
  std::int64_t fixed_offset_ = 0;
  std::string name_ = "UTC";
};

}  // namespace loopclean
