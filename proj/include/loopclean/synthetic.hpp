#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "loopclean/dataset.hpp"

namespace loopclean {

// Local-hour ranges [start, end), 0..24. Empty means the whole day.
using HourRanges = std::vector<std::pair<int, int>>;

struct RegimeSpec {
  std::string name;
  double weight = 0.0;            // mixing weight; weights sum to 1
  Eigen::Vector3d mean;           // (speed mph, volume/interval, occupancy %)
  Eigen::Matrix3d covariance;     // sampling covariance (diagonal if stddev given)
  HourRanges hours;               // schedule; empty = any hour
};

enum class AnomalyKind { StuckValue, PointOutlier, AnomalousCluster };

struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::StuckValue;
  std::string detector_id;        // target detector; "*" = any (point outliers only)
  double fraction = 0.0;          // of total rows (cluster, point outlier)
  long count = 0;                 // exact row count (stuck value)
  double primary_share = 0.95;    // cluster: share of its rows on detector_id
  Eigen::Vector3d values;         // stuck triple / cluster pattern center
  Eigen::Vector3d stddev = Eigen::Vector3d::Zero();  // cluster spread
  double outlier_scale = 6.0;     // point outlier: offset in regime stddevs
  HourRanges hours;               // restrict injection to local hours
};

/// Generator configuration standing in for a real detector archive: Gaussian
/// traffic regimes on a time-of-day schedule, plus injected anomalies.
/// Identical configs (seed included) generate byte-identical datasets.
struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::string highway = "I-405";
  Direction direction = Direction::NB;
  std::vector<std::string> detectors;
  CivilDate start_date{2015, 5, 1};
  int days = 1;
  int cadence_seconds = 20;
  std::string timezone = "US/Pacific";
  std::vector<RegimeSpec> regimes;
  std::vector<AnomalySpec> anomalies;

  static ScenarioConfig load(const std::string& path);
  static ScenarioConfig from_json_text(const std::string& text);

  void validate() const;  // throws InvalidScenario
  long rows_per_detector() const;
  long total_rows() const;
};

Dataset generate_synthetic(const ScenarioConfig& scenario);

}  // namespace loopclean
