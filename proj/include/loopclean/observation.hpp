#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "loopclean/timeutil.hpp"

namespace loopclean {

// Fixed feature order used everywhere: (speed, volume, occupancy).
inline constexpr std::array<std::string_view, 3> kFeatureOrder{"speed", "volume", "occupancy"};

enum class Direction { NB, SB };

std::string_view direction_name(Direction d);
std::optional<Direction> parse_direction(std::string_view s);

struct SegmentKey {
  std::string highway;
  Direction direction = Direction::NB;

  bool operator==(const SegmentKey&) const = default;
};

// Day-of-week grouping. Every calendar day belongs to exactly one of
// MonFri / TueWedThu / SatSun, and to All.
enum class TemporalGroup { All, MonFri, TueWedThu, SatSun };

std::string_view temporal_group_name(TemporalGroup g);
std::optional<TemporalGroup> parse_temporal_group(std::string_view s);

// Group of the LOCAL calendar day; never returns All.
TemporalGroup temporal_group_of(Timestamp t, const TimeZone& tz);
bool in_temporal_group(Timestamp t, const TimeZone& tz, TemporalGroup g);

/// One 20-second detector reading. Missing sensor values are kept missing;
/// they are never conflated with zero.
struct Observation {
  std::string detector_id;
  SegmentKey segment;
  Timestamp timestamp = 0;
  std::optional<double> speed;      // miles per hour, >= 0
  std::optional<int> volume;        // vehicles per interval, >= 0
  std::optional<double> occupancy;  // percent, 0..100

  bool has_all_features() const { return speed && volume && occupancy; }

  bool operator==(const Observation&) const = default;
};

// Raw (speed, volume, occupancy) triple; empty when any feature is missing.
std::optional<Eigen::Vector3d> feature_vector(const Observation& obs);

// A parsed-but-unvalidated input row.
struct RawRecord {
  std::string detector_id;
  std::string highway;
  std::string direction;
  std::string timestamp;
  std::string speed;
  std::string volume;
  std::string occupancy;
  long line = 0;
};

struct Rejection {
  long line = 0;
  std::string reason;
};

// Returns a well-formed Observation or a typed rejection. Empty fields are
// preserved as missing values, not rejected.
std::variant<Observation, Rejection> validate_observation(const RawRecord& record);

}  // namespace loopclean
