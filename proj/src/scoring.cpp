#include "loopclean/scoring.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "loopclean/csv.hpp"
#include "loopclean/errors.hpp"

namespace loopclean {

DistanceBand band_of(double distance) {
  if (distance < 2.0) return DistanceBand::Good;
  if (distance < 3.0) return DistanceBand::Suspect;
  if (distance < 4.0) return DistanceBand::Anomalous;
  return DistanceBand::Severe;
}

std::string_view band_name(DistanceBand band) {
  switch (band) {
    case DistanceBand::Good: return "good";
    case DistanceBand::Suspect: return "suspect";
    case DistanceBand::Anomalous: return "anomalous";
    case DistanceBand::Severe: return "severe";
  }
  return "good";
}

std::optional<DistanceBand> parse_band(std::string_view s) {
  if (s == "good") return DistanceBand::Good;
  if (s == "suspect") return DistanceBand::Suspect;
  if (s == "anomalous") return DistanceBand::Anomalous;
  if (s == "severe") return DistanceBand::Severe;
  return std::nullopt;
}

double mahalanobis(const Eigen::Vector3d& x, const Eigen::Vector3d& center,
                   const Eigen::Matrix3d& inverse_covariance) {
  const Eigen::Vector3d d = x - center;
  return std::sqrt(std::max(0.0, d.dot(inverse_covariance * d)));
}

Score score_vector(const Eigen::Vector3d& raw, const ClusterModel& model,
                   const ScoringOptions& options) {
  int best = 0;
  double best_metric = std::numeric_limits<double>::infinity();
  for (int c = 0; c < model.k; ++c) {
    const Eigen::Vector3d& center = model.centers_raw[static_cast<std::size_t>(c)];
    double metric;
    if (options.assignment == ScoringOptions::Assignment::Euclidean) {
      metric = (raw - center).squaredNorm();
    } else {
      const Eigen::Vector3d d = raw - center;
      metric = d.dot(model.inverse_covariance * d);
    }
    if (metric < best_metric) {
      best_metric = metric;
      best = c;
    }
  }
  Score score;
  score.regime_index = best;
  score.distance =
      mahalanobis(raw, model.centers_raw[static_cast<std::size_t>(best)], model.inverse_covariance);
  score.band = band_of(score.distance);
  score.is_outlier = score.distance > options.outlier_threshold;
  return score;
}

std::optional<Score> try_score(const Observation& obs, const ClusterModel& model,
                               const ScoringOptions& options) {
  const auto raw = feature_vector(obs);
  if (!raw) return std::nullopt;
  return score_vector(*raw, model, options);
}

Score assign_and_score(const Observation& obs, const ClusterModel& model,
                       const ScoringOptions& options) {
  const auto score = try_score(obs, model, options);
  if (!score) {
    throw MissingFeature("observation at " + format_iso8601(obs.timestamp) + " (detector " +
                         obs.detector_id + ") is missing a feature");
  }
  return *score;
}

ScoringResult score_dataset(const Dataset& dataset, const ClusterModel& model,
                            const ScoringOptions& options) {
  ScoringResult result;
  result.model_fingerprint = model.fingerprint();
  result.options = options;
  result.rows.reserve(dataset.observations.size());
  for (const auto& obs : dataset.observations) {
    ScoredObservation row;
    row.observation = obs;
    row.score = try_score(obs, model, options);
    if (!row.score) ++result.unscoreable;
    result.rows.push_back(std::move(row));
  }
  return result;
}

namespace {

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

constexpr std::string_view kScoredHeader =
    "detector_id,highway,direction,timestamp,speed,volume,occupancy,"
    "regime_index,distance,band,is_outlier";

}  // namespace

void write_scored_csv(const ScoringResult& result, const std::string& path) {
  std::ofstream out = open_csv_output(
      path, "kind=scored model=" + fingerprint_hex(result.model_fingerprint) +
                " threshold=" + format_double(result.options.outlier_threshold));
  out << kScoredHeader << '\n';
  for (const auto& row : result.rows) {
    const Observation& obs = row.observation;
    out << obs.detector_id << ',' << obs.segment.highway << ','
        << direction_name(obs.segment.direction) << ',' << format_iso8601(obs.timestamp) << ',';
    if (obs.speed) out << format_double(*obs.speed);
    out << ',';
    if (obs.volume) out << *obs.volume;
    out << ',';
    if (obs.occupancy) out << format_double(*obs.occupancy);
    out << ',';
    if (row.score) {
      out << row.score->regime_index << ',' << format_fixed(row.score->distance, 6) << ','
          << band_name(row.score->band) << ',' << (row.score->is_outlier ? "true" : "false");
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

ScoringResult read_scored_csv(const std::string& path) {
  std::ifstream in = open_csv_input(path);
  ScoringResult result;

  std::string line;
  long line_number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (is_comment_line(line)) {
      const std::size_t model_pos = line.find("model=");
      if (model_pos != std::string::npos) {
        result.model_fingerprint =
            std::strtoull(line.c_str() + model_pos + 6, nullptr, 16);
      }
      const std::size_t thr_pos = line.find("threshold=");
      if (thr_pos != std::string::npos) {
        result.options.outlier_threshold = std::strtod(line.c_str() + thr_pos + 10, nullptr);
      }
      continue;
    }
    if (!header_seen) {
      if (line != kScoredHeader) throw HeaderMismatch("unexpected scored CSV header in " + path);
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 11) {
      throw Error("scored CSV row " + std::to_string(line_number) + ": wrong field count");
    }
    RawRecord record{std::string(fields[0]), std::string(fields[1]), std::string(fields[2]),
                     std::string(fields[3]), std::string(fields[4]), std::string(fields[5]),
                     std::string(fields[6]), line_number};
    auto validated = validate_observation(record);
    auto* obs = std::get_if<Observation>(&validated);
    if (!obs) {
      throw Error("scored CSV row " + std::to_string(line_number) + ": " +
                  std::get<Rejection>(validated).reason);
    }
    ScoredObservation row;
    row.observation = std::move(*obs);
    if (!fields[7].empty()) {
      Score score;
      const auto idx = fields[7];
      auto [p1, e1] = std::from_chars(idx.data(), idx.data() + idx.size(), score.regime_index);
      const auto dist = fields[8];
      auto [p2, e2] = std::from_chars(dist.data(), dist.data() + dist.size(), score.distance);
      const auto band = parse_band(fields[9]);
      if (e1 != std::errc{} || e2 != std::errc{} || !band ||
          (fields[10] != "true" && fields[10] != "false")) {
        throw Error("scored CSV row " + std::to_string(line_number) + ": bad score columns");
      }
      score.band = *band;
      score.is_outlier = fields[10] == "true";
      row.score = score;
    } else {
      ++result.unscoreable;
    }
    result.rows.push_back(std::move(row));
  }
  if (!header_seen) throw HeaderMismatch("scored CSV has no header: " + path);
  return result;
}

}  // namespace loopclean
