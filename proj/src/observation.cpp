#include "loopclean/observation.hpp"

#include <charconv>
#include <cmath>

namespace loopclean {

std::string_view direction_name(Direction d) { return d == Direction::NB ? "NB" : "SB"; }

std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "NB") return Direction::NB;
  if (s == "SB") return Direction::SB;
  return std::nullopt;
}

std::string_view temporal_group_name(TemporalGroup g) {
  switch (g) {
    case TemporalGroup::All: return "all";
    case TemporalGroup::MonFri: return "monfri";
    case TemporalGroup::TueWedThu: return "tuewedthu";
    case TemporalGroup::SatSun: return "satsun";
  }
  return "all";
}

std::optional<TemporalGroup> parse_temporal_group(std::string_view s) {
  if (s == "all") return TemporalGroup::All;
  if (s == "monfri") return TemporalGroup::MonFri;
  if (s == "tuewedthu") return TemporalGroup::TueWedThu;
  if (s == "satsun") return TemporalGroup::SatSun;
  return std::nullopt;
}

TemporalGroup temporal_group_of(Timestamp t, const TimeZone& tz) {
  switch (tz.local_weekday(t)) {  // 0 = Sunday .. 6 = Saturday
    case 1:
    case 5: return TemporalGroup::MonFri;
    case 2:
    case 3:
    case 4: return TemporalGroup::TueWedThu;
    default: return TemporalGroup::SatSun;
  }
}

bool in_temporal_group(Timestamp t, const TimeZone& tz, TemporalGroup g) {
  return g == TemporalGroup::All || temporal_group_of(t, tz) == g;
}

std::optional<Eigen::Vector3d> feature_vector(const Observation& obs) {
  if (!obs.has_all_features()) return std::nullopt;
  return Eigen::Vector3d(*obs.speed, static_cast<double>(*obs.volume), *obs.occupancy);
}

namespace {

std::optional<double> parse_number(std::string_view s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<long> parse_integer(std::string_view s) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

Rejection reject(const RawRecord& r, std::string reason) { return Rejection{r.line, std::move(reason)}; }

}  // namespace

std::variant<Observation, Rejection> validate_observation(const RawRecord& record) {
  Observation obs;
  if (record.detector_id.empty()) return reject(record, "missing detector_id");
  obs.detector_id = record.detector_id;

  const auto dir = parse_direction(record.direction);
  if (!dir) return reject(record, "direction must be NB or SB");
  obs.segment = SegmentKey{record.highway, *dir};

  const auto ts = parse_iso8601(record.timestamp);
  if (!ts) return reject(record, "unparseable timestamp");
  obs.timestamp = *ts;

  if (!record.speed.empty()) {
    const auto speed = parse_number(record.speed);
    if (!speed) return reject(record, "unparseable speed");
    if (*speed < 0) return reject(record, "negative speed");
    obs.speed = *speed;
  }
  if (!record.volume.empty()) {
    const auto volume = parse_integer(record.volume);
    if (!volume) return reject(record, "volume not an integer");
    if (*volume < 0) return reject(record, "negative volume");
    obs.volume = static_cast<int>(*volume);
  }
  if (!record.occupancy.empty()) {
    const auto occ = parse_number(record.occupancy);
    if (!occ) return reject(record, "unparseable occupancy");
    if (*occ < 0 || *occ > 100) return reject(record, "occupancy out of [0,100]");
    obs.occupancy = *occ;
  }
  return obs;
}

}  // namespace loopclean
