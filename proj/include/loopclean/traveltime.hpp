#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopclean/scoring.hpp"

namespace loopclean {

/// Ordered detectors along a segment; each detector's speed stands for its
/// influence length during travel-time integration.
struct DetectorLayout {
  struct Entry {
    std::string detector_id;
    double influence_miles = 0.0;
  };
  std::vector<Entry> entries;

  double total_miles() const;
  void validate() const;  // lengths > 0, ids unique and non-empty

  // CSV: detector_id,influence_length_miles
  static DetectorLayout load_csv(const std::string& path);
};

/// Per-observation keep/drop decisions; every input row appears exactly once.
struct CleaningOutcome {
  struct Row {
    bool kept = true;
    std::string reason;  // rule id when dropped
  };
  std::vector<Row> rows;  // parallel to the cleaner's input order

  std::size_t kept_count() const;
  std::size_t dropped_count() const { return rows.size() - kept_count(); }
};

// Static threshold tests; a row is dropped when any rule fires:
//   speed_gt_100               speed > 100
//   volume_gt_17               20-second volume > 17
//   occupancy_out_of_range     occupancy outside [0,100]
//   zero_speed_nonzero_volume  speed = 0 with volume > 0
//   missing_feature            any feature missing
CleaningOutcome rule_clean(const Dataset& dataset);

// Drops rows whose Mahalanobis distance exceeds the threshold
// ("mahalanobis_outlier"); unscoreable rows are dropped as "unscoreable".
CleaningOutcome ml_clean(const ScoringResult& scored, double threshold = 2.5);

struct MinuteSpeed {
  std::int64_t minute = 0;  // Unix minutes, UTC
  double speed_mph = 0.0;
  bool carried = false;  // filled from an earlier minute
};

struct MinuteSpeedSeries {
  std::string detector_id;
  std::vector<MinuteSpeed> minutes;  // ascending
};

/// Mean kept-observation speed per minute for one detector. A minute with
/// no kept observations carries the last real minute forward for up to
/// `lookback_minutes`; beyond that it is missing.
MinuteSpeedSeries per_minute_speeds(const Dataset& dataset, const CleaningOutcome& cleaning,
                                    const std::string& detector_id, int lookback_minutes = 5);

struct TravelTimePoint {
  std::int64_t minute = 0;
  double minutes = 0.0;  // > 0
};

struct TravelTimeSeries {
  std::vector<TravelTimePoint> points;  // ascending by minute; absent = missing

  std::optional<double> at(std::int64_t minute) const;

  // CSV: minute (ISO-8601, truncated to the minute), travel_time_minutes
  void save_csv(const std::string& path) const;
  static TravelTimeSeries load_csv(const std::string& path);
};

/// Midpoint-method travel time: sum over detectors of
/// influence_miles * 60 / speed. Missing whenever any detector has no
/// usable (positive) speed for the minute.
TravelTimeSeries estimate_travel_times(const DetectorLayout& layout,
                                       const std::vector<MinuteSpeedSeries>& speeds);

// Weekday + afternoon-peak restriction applied on the local clock.
struct PeakFilter {
  TimeZone tz;
  int start_hour = 16;  // inclusive
  int end_hour = 18;    // exclusive
  bool weekdays_only = true;

  bool passes(std::int64_t minute) const;
};

enum class AgreementCategory {
  BothAgreeWithTruth = 0,
  MethodsAgreeDifferFromTruth = 1,
  MlOnlyAgrees = 2,
  RuleOnlyAgrees = 3,
  AllDisagree = 4,
};

std::string_view agreement_category_label(AgreementCategory c);

/// Five-way comparison of two travel-time series against ground truth over
/// minutes where all three are present and pass the filter. "Agree" means
/// equal after rounding to the nearest whole minute (half up). Percentages
/// are integers apportioned by largest remainder, so they total 100.
struct AgreementTable {
  std::array<std::size_t, 5> counts{};
  std::array<int, 5> percentages{};
  std::size_t total = 0;
};

AgreementTable agreement_table(const TravelTimeSeries& rule, const TravelTimeSeries& ml,
                               const TravelTimeSeries& truth, const PeakFilter& filter);

void write_agreement_csv(const AgreementTable& table, const std::string& path);
std::string format_agreement_table(const AgreementTable& table);

/// Unrounded closeness comparison over the minutes where both methods and
/// ground truth all disagree (after rounding). Margins are mean differences
/// of absolute errors. Throws EmptyCategory when no such minutes exist.
struct DisagreementBreakdown {
  std::size_t total = 0;
  std::size_t ml_closer = 0;
  std::size_t rule_closer = 0;
  std::size_t ties = 0;
  double ml_closer_share = 0.0;
  double rule_closer_share = 0.0;
  double mean_margin_ml = 0.0;    // how much closer ml was, when it was
  double mean_margin_rule = 0.0;  // how much closer rule was, when it was
};

DisagreementBreakdown disagreement_breakdown(const TravelTimeSeries& rule,
                                             const TravelTimeSeries& ml,
                                             const TravelTimeSeries& truth,
                                             const PeakFilter& filter);

std::int64_t round_half_up(double x);

}  // namespace loopclean
