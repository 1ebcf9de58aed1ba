#include "loopclean/traveltime.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "loopclean/csv.hpp"
#include "loopclean/errors.hpp"

namespace loopclean {

double DetectorLayout::total_miles() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.influence_miles;
  return total;
}

void DetectorLayout::validate() const {
  if (entries.empty()) throw Error("layout: no detectors");
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.detector_id.empty()) throw Error("layout: empty detector_id");
    if (!(e.influence_miles > 0)) {
      throw Error("layout: influence length must be > 0 for " + e.detector_id);
    }
    if (!seen.insert(e.detector_id).second) {
      throw Error("layout: duplicate detector " + e.detector_id);
    }
  }
}

DetectorLayout DetectorLayout::load_csv(const std::string& path) {
  std::ifstream in = open_csv_input(path);
  DetectorLayout layout;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || is_comment_line(line)) continue;
    if (!header_seen) {
      if (line != "detector_id,influence_length_miles") {
        throw HeaderMismatch("layout header mismatch in " + path);
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw Error("layout: wrong field count in " + path);
    double miles = 0.0;
    auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), miles);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size()) {
      throw Error("layout: bad influence length '" + std::string(fields[1]) + "'");
    }
    layout.entries.push_back({std::string(fields[0]), miles});
  }
  layout.validate();
  return layout;
}

std::size_t CleaningOutcome::kept_count() const {
  std::size_t kept = 0;
  for (const auto& r : rows) kept += r.kept ? 1 : 0;
  return kept;
}

CleaningOutcome rule_clean(const Dataset& dataset) {
  CleaningOutcome outcome;
  outcome.rows.reserve(dataset.observations.size());
  for (const auto& obs : dataset.observations) {
    CleaningOutcome::Row row;
    if (obs.speed && *obs.speed > 100.0) {
      row = {false, "speed_gt_100"};
    } else if (obs.volume && *obs.volume > 17) {
      row = {false, "volume_gt_17"};
    } else if (obs.occupancy && (*obs.occupancy < 0.0 || *obs.occupancy > 100.0)) {
      row = {false, "occupancy_out_of_range"};
    } else if (obs.speed && obs.volume && *obs.speed == 0.0 && *obs.volume > 0) {
      row = {false, "zero_speed_nonzero_volume"};
    } else if (!obs.has_all_features()) {
      row = {false, "missing_feature"};
    }
    outcome.rows.push_back(std::move(row));
  }
  return outcome;
}

CleaningOutcome ml_clean(const ScoringResult& scored, double threshold) {
  CleaningOutcome outcome;
  outcome.rows.reserve(scored.rows.size());
  for (const auto& row : scored.rows) {
    if (!row.score) {
      outcome.rows.push_back({false, "unscoreable"});
    } else if (row.score->distance > threshold) {
      outcome.rows.push_back({false, "mahalanobis_outlier"});
    } else {
      outcome.rows.push_back({});
    }
  }
  return outcome;
}

MinuteSpeedSeries per_minute_speeds(const Dataset& dataset, const CleaningOutcome& cleaning,
                                    const std::string& detector_id, int lookback_minutes) {
  if (cleaning.rows.size() != dataset.observations.size()) {
    throw Error("per_minute_speeds: cleaning outcome does not match the dataset");
  }
  std::map<std::int64_t, std::pair<double, std::size_t>> sums;  // minute -> (sum, count)
  for (std::size_t i = 0; i < dataset.observations.size(); ++i) {
    if (!cleaning.rows[i].kept) continue;
    const Observation& obs = dataset.observations[i];
    if (obs.detector_id != detector_id || !obs.speed) continue;
    auto& cell = sums[floor_div(obs.timestamp, 60)];
    cell.first += *obs.speed;
    cell.second += 1;
  }

  MinuteSpeedSeries series;
  series.detector_id = detector_id;
  if (sums.empty()) return series;

  const std::int64_t first = sums.begin()->first;
  const std::int64_t last = sums.rbegin()->first;
  std::int64_t last_real = first - lookback_minutes - 1;
  double last_speed = 0.0;
  for (std::int64_t minute = first; minute <= last; ++minute) {
    const auto it = sums.find(minute);
    if (it != sums.end()) {
      const double mean = it->second.first / static_cast<double>(it->second.second);
      series.minutes.push_back({minute, mean, false});
      last_real = minute;
      last_speed = mean;
    } else if (minute - last_real <= lookback_minutes) {
      series.minutes.push_back({minute, last_speed, true});
    }
  }
  return series;
}

std::optional<double> TravelTimeSeries::at(std::int64_t minute) const {
  const auto it = std::lower_bound(points.begin(), points.end(), minute,
                                   [](const TravelTimePoint& p, std::int64_t m) { return p.minute < m; });
  if (it == points.end() || it->minute != minute) return std::nullopt;
  return it->minutes;
}

void TravelTimeSeries::save_csv(const std::string& path) const {
  std::ofstream out = open_csv_output(path, "kind=travel_times");
  out << "minute,travel_time_minutes\n";
  for (const auto& p : points) {
    out << format_iso8601_minute(p.minute * 60) << ',' << format_double(p.minutes) << '\n';
  }
}

TravelTimeSeries TravelTimeSeries::load_csv(const std::string& path) {
  std::ifstream in = open_csv_input(path);
  TravelTimeSeries series;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || is_comment_line(line)) continue;
    if (!header_seen) {
      if (line != "minute,travel_time_minutes") {
        throw HeaderMismatch("travel-time header mismatch in " + path);
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw Error("travel-time CSV: wrong field count in " + path);
    const auto ts = parse_iso8601(fields[0]);
    if (!ts) throw Error("travel-time CSV: bad minute '" + std::string(fields[0]) + "'");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), value);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size() || !(value > 0)) {
      throw Error("travel-time CSV: bad value '" + std::string(fields[1]) + "'");
    }
    series.points.push_back({floor_div(*ts, 60), value});
  }
  std::sort(series.points.begin(), series.points.end(),
            [](const TravelTimePoint& a, const TravelTimePoint& b) { return a.minute < b.minute; });
  return series;
}

TravelTimeSeries estimate_travel_times(const DetectorLayout& layout,
                                       const std::vector<MinuteSpeedSeries>& speeds) {
  layout.validate();
  std::map<std::string, std::map<std::int64_t, double>> lookup;
  for (const auto& series : speeds) {
    auto& per_minute = lookup[series.detector_id];
    for (const auto& m : series.minutes) per_minute[m.minute] = m.speed_mph;
  }
  for (const auto& e : layout.entries) {
    if (lookup.find(e.detector_id) == lookup.end()) {
      throw Error("estimate_travel_times: no speed series for detector " + e.detector_id);
    }
  }

  // Candidate minutes: those present for the first layout detector; a minute
  // missing anywhere in the layout yields no estimate.
  TravelTimeSeries series;
  const auto& first = lookup[layout.entries.front().detector_id];
  for (const auto& [minute, speed0] : first) {
    (void)speed0;
    double total = 0.0;
    bool ok = true;
    for (const auto& e : layout.entries) {
      const auto& per_minute = lookup[e.detector_id];
      const auto it = per_minute.find(minute);
      if (it == per_minute.end() || !(it->second > 0.0)) {
        ok = false;
        break;
      }
      total += e.influence_miles * 60.0 / it->second;
    }
    if (ok) series.points.push_back({minute, total});
  }
  return series;
}

bool PeakFilter::passes(std::int64_t minute) const {
  const Timestamp t = minute * 60;
  if (weekdays_only) {
    const int wd = tz.local_weekday(t);
    if (wd == 0 || wd == 6) return false;
  }
  const int hour = tz.local_hour(t);
  return hour >= start_hour && hour < end_hour;
}

std::int64_t round_half_up(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

std::string_view agreement_category_label(AgreementCategory c) {
  switch (c) {
    case AgreementCategory::BothAgreeWithTruth: return "Both methods agree with GT";
    case AgreementCategory::MethodsAgreeDifferFromTruth: return "Methods agree, but differ from GT";
    case AgreementCategory::MlOnlyAgrees: return "New method only agrees with GT";
    case AgreementCategory::RuleOnlyAgrees: return "Rule-based method only agrees with GT";
    case AgreementCategory::AllDisagree: return "Methods disagree with each other and with GT";
  }
  return "";
}

namespace {

struct AlignedMinute {
  std::int64_t minute;
  double rule;
  double ml;
  double truth;
};

std::vector<AlignedMinute> align(const TravelTimeSeries& rule, const TravelTimeSeries& ml,
                                 const TravelTimeSeries& truth, const PeakFilter& filter) {
  std::vector<AlignedMinute> aligned;
  for (const auto& p : truth.points) {
    if (!filter.passes(p.minute)) continue;
    const auto r = rule.at(p.minute);
    const auto m = ml.at(p.minute);
    if (!r || !m) continue;
    aligned.push_back({p.minute, *r, *m, p.minutes});
  }
  return aligned;
}

AgreementCategory classify(const AlignedMinute& row) {
  const std::int64_t r = round_half_up(row.rule);
  const std::int64_t m = round_half_up(row.ml);
  const std::int64_t t = round_half_up(row.truth);
  if (r == m) {
    return r == t ? AgreementCategory::BothAgreeWithTruth
                  : AgreementCategory::MethodsAgreeDifferFromTruth;
  }
  if (m == t) return AgreementCategory::MlOnlyAgrees;
  if (r == t) return AgreementCategory::RuleOnlyAgrees;
  return AgreementCategory::AllDisagree;
}

// Integer percentages by largest remainder; they always total 100.
std::array<int, 5> apportion_percentages(const std::array<std::size_t, 5>& counts,
                                         std::size_t total) {
  std::array<int, 5> out{};
  if (total == 0) return out;
  std::array<double, 5> remainders{};
  int assigned = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double exact = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(total);
    out[i] = static_cast<int>(std::floor(exact));
    remainders[i] = exact - std::floor(exact);
    assigned += out[i];
  }
  for (int extra = 100 - assigned; extra > 0; --extra) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 5; ++i) {
      if (remainders[i] > remainders[best]) best = i;
    }
    ++out[best];
    remainders[best] = -1.0;
  }
  return out;
}

}  // namespace

AgreementTable agreement_table(const TravelTimeSeries& rule, const TravelTimeSeries& ml,
                               const TravelTimeSeries& truth, const PeakFilter& filter) {
  AgreementTable table;
  for (const auto& row : align(rule, ml, truth, filter)) {
    ++table.counts[static_cast<std::size_t>(classify(row))];
    ++table.total;
  }
  table.percentages = apportion_percentages(table.counts, table.total);
  return table;
}

void write_agreement_csv(const AgreementTable& table, const std::string& path) {
  std::ofstream out = open_csv_output(path, "kind=agreement");
  out << "category,count,percent\n";
  for (std::size_t i = 0; i < 5; ++i) {
    out << agreement_category_label(static_cast<AgreementCategory>(i)) << ',' << table.counts[i]
        << ',' << table.percentages[i] << '\n';
  }
  out << "Number of observations," << table.total << ",\n";
}

std::string format_agreement_table(const AgreementTable& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto label = agreement_category_label(static_cast<AgreementCategory>(i));
    out << label;
    for (std::size_t pad = label.size(); pad < 46; ++pad) out << ' ';
    out << table.percentages[i] << "%  (" << table.counts[i] << ")\n";
  }
  out << "Number of observations";
  for (std::size_t pad = 22; pad < 46; ++pad) out << ' ';
  out << table.total << '\n';
  return out.str();
}

DisagreementBreakdown disagreement_breakdown(const TravelTimeSeries& rule,
                                             const TravelTimeSeries& ml,
                                             const TravelTimeSeries& truth,
                                             const PeakFilter& filter) {
  DisagreementBreakdown breakdown;
  double margin_ml = 0.0;
  double margin_rule = 0.0;
  for (const auto& row : align(rule, ml, truth, filter)) {
    if (classify(row) != AgreementCategory::AllDisagree) continue;
    ++breakdown.total;
    const double rule_err = std::abs(row.rule - row.truth);
    const double ml_err = std::abs(row.ml - row.truth);
    if (ml_err < rule_err) {
      ++breakdown.ml_closer;
      margin_ml += rule_err - ml_err;
    } else if (rule_err < ml_err) {
      ++breakdown.rule_closer;
      margin_rule += ml_err - rule_err;
    } else {
      ++breakdown.ties;
    }
  }
  if (breakdown.total == 0) {
    throw EmptyCategory("no minutes where both methods and ground truth disagree");
  }
  breakdown.ml_closer_share =
      static_cast<double>(breakdown.ml_closer) / static_cast<double>(breakdown.total);
  breakdown.rule_closer_share =
      static_cast<double>(breakdown.rule_closer) / static_cast<double>(breakdown.total);
  if (breakdown.ml_closer > 0) {
    breakdown.mean_margin_ml = margin_ml / static_cast<double>(breakdown.ml_closer);
  }
  if (breakdown.rule_closer > 0) {
    breakdown.mean_margin_rule = margin_rule / static_cast<double>(breakdown.rule_closer);
  }
  return breakdown;
}

}  // namespace loopclean
