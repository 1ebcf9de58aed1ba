#include "loopclean/regimes.hpp"

#include <algorithm>
#include <map>

#include "loopclean/csv.hpp"
#include "loopclean/errors.hpp"

namespace loopclean {

RegimeSeries regime_series(const ScoringResult& scored, const std::string& detector_id) {
  RegimeSeries series;
  series.detector_id = detector_id;
  bool in_gap = false;
  Timestamp last_ts = 0;
  bool any = false;
  for (const auto& row : scored.rows) {
    if (row.observation.detector_id != detector_id) continue;
    const Timestamp ts = row.observation.timestamp;
    if (any && ts <= last_ts) continue;  // enforce strictly increasing
    any = true;
    last_ts = ts;
    if (row.score) {
      series.points.push_back(RegimePoint{ts, row.score->regime_index, row.score->distance});
      in_gap = false;
    } else {
      if (in_gap) {
        series.gaps.back().end = ts;
      } else {
        series.gaps.push_back(GapInterval{ts, ts});
        in_gap = true;
      }
    }
  }
  return series;
}

RegimeSeries smooth_series(const Dataset& raw, const ClusterModel& model,
                           const std::string& detector_id, const SmoothOptions& smooth,
                           const ScoringOptions& scoring) {
  if (smooth.window < 1) throw Error("smooth_series: window must be >= 1");

  struct Row {
    Timestamp ts;
    std::optional<Eigen::Vector3d> features;
  };
  std::vector<Row> rows;
  for (const auto& obs : raw.observations) {
    if (obs.detector_id != detector_id) continue;
    if (!rows.empty() && obs.timestamp <= rows.back().ts) continue;
    rows.push_back(Row{obs.timestamp, feature_vector(obs)});
  }

  RegimeSeries series;
  series.detector_id = detector_id;
  bool in_gap = false;
  const int w = smooth.window;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t begin, end;  // [begin, end)
    if (smooth.centered) {
      const std::size_t half = static_cast<std::size_t>(w) / 2;
      begin = i >= half ? i - half : 0;
      end = std::min(rows.size(), i + static_cast<std::size_t>(w) - half);
    } else {
      begin = i + 1 >= static_cast<std::size_t>(w) ? i + 1 - static_cast<std::size_t>(w) : 0;
      end = i + 1;
    }
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int valid = 0;
    for (std::size_t j = begin; j < end; ++j) {
      if (rows[j].features) {
        sum += *rows[j].features;
        ++valid;
      }
    }
    if (valid == 0) {
      if (in_gap) {
        series.gaps.back().end = rows[i].ts;
      } else {
        series.gaps.push_back(GapInterval{rows[i].ts, rows[i].ts});
        in_gap = true;
      }
      continue;
    }
    in_gap = false;
    const Eigen::Vector3d averaged = sum / static_cast<double>(valid);
    const Score score = score_vector(averaged, model, scoring);
    series.points.push_back(RegimePoint{rows[i].ts, score.regime_index, score.distance});
  }
  return series;
}

std::size_t count_transitions(const RegimeSeries& series) {
  std::size_t transitions = 0;
  for (std::size_t i = 1; i < series.points.size(); ++i) {
    if (series.points[i].regime_index != series.points[i - 1].regime_index) ++transitions;
  }
  return transitions;
}

void write_series_csv(const RegimeSeries& raw, const RegimeSeries& smoothed,
                      const std::string& path) {
  std::map<Timestamp, std::pair<const RegimePoint*, const RegimePoint*>> merged;
  for (const auto& p : raw.points) merged[p.timestamp].first = &p;
  for (const auto& p : smoothed.points) merged[p.timestamp].second = &p;

  std::ofstream out = open_csv_output(path, "kind=regime_series detector=" + raw.detector_id);
  out << "timestamp,regime_index,distance,smoothed_regime_index\n";
  for (const auto& [ts, pair] : merged) {
    out << format_iso8601(ts) << ',';
    if (pair.first) out << pair.first->regime_index << ',' << format_fixed(pair.first->distance, 6);
    else out << ',';
    out << ',';
    if (pair.second) out << pair.second->regime_index;
    out << '\n';
  }
}

}  // namespace loopclean
