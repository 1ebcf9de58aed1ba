#include "loopclean/synthetic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "loopclean/errors.hpp"
#include "loopclean/rng.hpp"

namespace loopclean {

namespace {

using nlohmann::json;

Eigen::Vector3d vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidScenario(std::string(what) + " must be a 3-array");
  return Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Eigen::Matrix3d mat3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidScenario(std::string(what) + " must be 3x3");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const Eigen::Vector3d row = vec3_from(j[static_cast<std::size_t>(r)], what);
    m.row(r) = row.transpose();
  }
  return m;
}

HourRanges hours_from(const json& j) {
  HourRanges ranges;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) throw InvalidScenario("hours entries must be [start,end]");
    ranges.emplace_back(pair[0].get<int>(), pair[1].get<int>());
  }
  return ranges;
}

bool hour_in_ranges(int hour, const HourRanges& ranges) {
  if (ranges.empty()) return true;
  for (const auto& [start, end] : ranges) {
    if (hour >= start && hour < end) return true;
  }
  return false;
}

// Matrix square root via eigendecomposition; accepts PSD inputs with zero
// eigenvalues (an exactly-constant feature is a valid scenario).
Eigen::Matrix3d sampling_root(const Eigen::Matrix3d& cov, const std::string& regime) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d lambda = solver.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  Eigen::Vector3d root;
  for (int i = 0; i < 3; ++i) {
    if (lambda[i] < -1e-9 * scale) {
      throw InvalidScenario("regime '" + regime + "' covariance is not positive semidefinite");
    }
    root[i] = std::sqrt(std::max(lambda[i], 0.0));
  }
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

struct GeneratedRow {
  Timestamp timestamp;
  int detector_index;
  int regime_index;
  Eigen::Vector3d features;  // pre-clamp raw values
};

void clamp_into(Observation& obs, const Eigen::Vector3d& f) {
  obs.speed = std::max(0.0, f[0]);
  obs.volume = static_cast<int>(std::max<long>(0, std::lround(f[1])));
  obs.occupancy = std::clamp(f[2], 0.0, 100.0);
}

// Partial Fisher-Yates: first n entries of a deterministic shuffle,
// returned in ascending order so replacement draws follow row order.
std::vector<std::size_t> sample_positions(std::vector<std::size_t> eligible, std::size_t n, Rng& rng) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(n);
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

}  // namespace

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileUnreadable("cannot open scenario: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidScenario(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    ScenarioConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.highway = j.value("highway", std::string("I-405"));
    if (j.contains("direction")) {
      const auto dir = parse_direction(j["direction"].get<std::string>());
      if (!dir) throw InvalidScenario("direction must be NB or SB");
      cfg.direction = *dir;
    }
    cfg.detectors = j.value("detectors", std::vector<std::string>{});
    if (j.contains("start_date")) {
      const auto ts = parse_iso8601(j["start_date"].get<std::string>());
      if (!ts) throw InvalidScenario("start_date must be YYYY-MM-DD");
      cfg.start_date = civil_from_days(floor_div(*ts, 86400));
    }
    cfg.days = j.value("days", 1);
    cfg.cadence_seconds = j.value("cadence_seconds", 20);
    cfg.timezone = j.value("timezone", std::string("US/Pacific"));

    for (const auto& r : j.value("regimes", json::array())) {
      RegimeSpec spec;
      spec.name = r.value("name", std::string("regime"));
      spec.weight = r.at("weight").get<double>();
      spec.mean = vec3_from(r.at("mean"), "regime mean");
      if (r.contains("cov")) {
        spec.covariance = mat3_from(r["cov"], "regime cov");
      } else {
        const Eigen::Vector3d sd = vec3_from(r.at("stddev"), "regime stddev");
        spec.covariance = sd.cwiseProduct(sd).asDiagonal();
      }
      if (r.contains("hours")) spec.hours = hours_from(r["hours"]);
      cfg.regimes.push_back(std::move(spec));
    }

    for (const auto& a : j.value("anomalies", json::array())) {
      AnomalySpec spec;
      const std::string kind = a.at("kind").get<std::string>();
      if (kind == "stuck_value") {
        spec.kind = AnomalyKind::StuckValue;
      } else if (kind == "point_outlier") {
        spec.kind = AnomalyKind::PointOutlier;
      } else if (kind == "anomalous_cluster") {
        spec.kind = AnomalyKind::AnomalousCluster;
      } else {
        throw InvalidScenario("unknown anomaly kind: " + kind);
      }
      spec.detector_id = a.value("detector_id", std::string("*"));
      spec.fraction = a.value("fraction", 0.0);
      spec.count = a.value("count", 0L);
      spec.primary_share = a.value("primary_share", 0.95);
      if (a.contains("values")) spec.values = vec3_from(a["values"], "anomaly values");
      if (a.contains("mean")) spec.values = vec3_from(a["mean"], "anomaly mean");
      if (a.contains("stddev")) spec.stddev = vec3_from(a["stddev"], "anomaly stddev");
      spec.outlier_scale = a.value("scale", 6.0);
      if (a.contains("hours")) spec.hours = hours_from(a["hours"]);
      cfg.anomalies.push_back(std::move(spec));
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw InvalidScenario(std::string("bad scenario field: ") + e.what());
  }
}

void ScenarioConfig::validate() const {
  if (detectors.empty()) throw InvalidScenario("detector roster is empty");
  if (regimes.empty()) throw InvalidScenario("at least one regime is required");
  if (days < 1) throw InvalidScenario("days must be >= 1");
  if (cadence_seconds < 1 || 86400 % cadence_seconds != 0) {
    throw InvalidScenario("cadence_seconds must divide 86400");
  }
  double weight_sum = 0.0;
  for (const auto& r : regimes) {
    if (r.weight < 0) throw InvalidScenario("regime weight must be >= 0");
    weight_sum += r.weight;
    for (const auto& [start, end] : r.hours) {
      if (start < 0 || end > 24 || start >= end) throw InvalidScenario("bad hour range");
    }
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) throw InvalidScenario("regime weights must sum to 1");
  for (const auto& a : anomalies) {
    if (a.fraction < 0 || a.fraction > 1) throw InvalidScenario("anomaly fraction must be in [0,1]");
    if (a.count < 0) throw InvalidScenario("anomaly count must be >= 0");
    if (a.primary_share < 0 || a.primary_share > 1) {
      throw InvalidScenario("primary_share must be in [0,1]");
    }
    const bool needs_detector = a.kind != AnomalyKind::PointOutlier;
    if (needs_detector &&
        std::find(detectors.begin(), detectors.end(), a.detector_id) == detectors.end()) {
      throw InvalidScenario("anomaly detector_id '" + a.detector_id + "' is not in the roster");
    }
  }
  TimeZone::parse(timezone);
}

long ScenarioConfig::rows_per_detector() const {
  return static_cast<long>(days) * (86400 / cadence_seconds);
}

long ScenarioConfig::total_rows() const {
  return rows_per_detector() * static_cast<long>(detectors.size());
}

Dataset generate_synthetic(const ScenarioConfig& scenario) {
  scenario.validate();
  const TimeZone tz = TimeZone::parse(scenario.timezone);

  // The day starts at local midnight of start_date.
  const std::int64_t start_day = days_from_civil(scenario.start_date.year, scenario.start_date.month,
                                                 scenario.start_date.day);
  Timestamp start_utc = start_day * 86400;
  start_utc -= tz.offset_at(start_utc);

  std::vector<Eigen::Matrix3d> roots;
  roots.reserve(scenario.regimes.size());
  for (const auto& r : scenario.regimes) roots.push_back(sampling_root(r.covariance, r.name));

  const long per_detector = scenario.rows_per_detector();
  std::vector<GeneratedRow> rows;
  rows.reserve(static_cast<std::size_t>(scenario.total_rows()));

  for (std::size_t d = 0; d < scenario.detectors.size(); ++d) {
    Rng rng(derive_seed(scenario.seed, d));
    for (long i = 0; i < per_detector; ++i) {
      const Timestamp ts = start_utc + static_cast<Timestamp>(i) * scenario.cadence_seconds;
      const int hour = tz.local_hour(ts);

      // Regimes scheduled for this hour compete by weight; an empty match
      // falls back to the full mixture.
      double active_weight = 0.0;
      for (const auto& r : scenario.regimes) {
        if (hour_in_ranges(hour, r.hours)) active_weight += r.weight;
      }
      const bool scheduled = active_weight > 0.0;
      const double total = scheduled ? active_weight : 1.0;
      const double pick = rng.uniform01() * total;
      int regime = 0;
      double cumulative = 0.0;
      for (std::size_t r = 0; r < scenario.regimes.size(); ++r) {
        if (scheduled && !hour_in_ranges(hour, scenario.regimes[r].hours)) continue;
        cumulative += scenario.regimes[r].weight;
        regime = static_cast<int>(r);
        if (pick < cumulative) break;
      }

      const Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
      const Eigen::Vector3d f =
          scenario.regimes[static_cast<std::size_t>(regime)].mean +
          roots[static_cast<std::size_t>(regime)] * z;
      rows.push_back(GeneratedRow{ts, static_cast<int>(d), regime, f});
    }
  }

  // Anomaly injection replaces sampled rows in place; a row is replaced at
  // most once so configured counts stay exact.
  std::vector<bool> taken(rows.size(), false);
  for (std::size_t a = 0; a < scenario.anomalies.size(); ++a) {
    const AnomalySpec& spec = scenario.anomalies[a];
    Rng rng(derive_seed(scenario.seed, 0x0a0a0a0aULL + a));

    auto eligible = [&](const std::string& detector, bool exclude_detector) {
      std::vector<std::size_t> out;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (taken[i]) continue;
        const std::string& row_det = scenario.detectors[static_cast<std::size_t>(rows[i].detector_index)];
        const bool match = detector == "*" || (row_det == detector) != exclude_detector;
        if (!match) continue;
        if (!hour_in_ranges(tz.local_hour(rows[i].timestamp), spec.hours)) continue;
        out.push_back(i);
      }
      return out;
    };

    auto take = [&](const std::vector<std::size_t>& pool, std::size_t n, auto&& fill) {
      if (pool.size() < n) {
        throw InvalidScenario("anomaly " + std::to_string(a) + " needs " + std::to_string(n) +
                              " rows but only " + std::to_string(pool.size()) + " are eligible");
      }
      for (std::size_t idx : sample_positions(pool, n, rng)) {
        fill(rows[idx]);
        taken[idx] = true;
      }
    };

    switch (spec.kind) {
      case AnomalyKind::StuckValue: {
        take(eligible(spec.detector_id, false), static_cast<std::size_t>(spec.count),
             [&](GeneratedRow& row) { row.features = spec.values; });
        break;
      }
      case AnomalyKind::AnomalousCluster: {
        const auto n_total =
            static_cast<std::size_t>(std::llround(spec.fraction * static_cast<double>(rows.size())));
        const auto n_primary = std::min(
            n_total, static_cast<std::size_t>(std::ceil(spec.primary_share * static_cast<double>(n_total))));
        auto draw = [&](GeneratedRow& row) {
          const Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
          row.features = spec.values + spec.stddev.cwiseProduct(z);
        };
        take(eligible(spec.detector_id, false), n_primary, draw);
        take(eligible(spec.detector_id, true), n_total - n_primary, draw);
        break;
      }
      case AnomalyKind::PointOutlier: {
        const auto n =
            static_cast<std::size_t>(std::llround(spec.fraction * static_cast<double>(rows.size())));
        take(eligible(spec.detector_id, false), n, [&](GeneratedRow& row) {
          const auto& regime = scenario.regimes[static_cast<std::size_t>(row.regime_index)];
          Eigen::Vector3d u(rng.normal(), rng.normal(), rng.normal());
          const double norm = u.norm();
          if (norm > 0) u /= norm;
          const Eigen::Vector3d sd = regime.covariance.diagonal().cwiseSqrt();
          row.features = regime.mean + spec.outlier_scale * sd.cwiseProduct(u);
        });
        break;
      }
    }
  }

  Dataset dataset;
  dataset.provenance = "synthetic seed=" + std::to_string(scenario.seed);
  dataset.observations.reserve(rows.size());
  const SegmentKey segment{scenario.highway, scenario.direction};
  for (const auto& row : rows) {
    Observation obs;
    obs.detector_id = scenario.detectors[static_cast<std::size_t>(row.detector_index)];
    obs.segment = segment;
    obs.timestamp = row.timestamp;
    clamp_into(obs, row.features);
    dataset.observations.push_back(std::move(obs));
  }
  sort_dataset(dataset);
  return dataset;
}

}  // namespace loopclean
