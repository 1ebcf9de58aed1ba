#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loopclean/cluster_model.hpp"

namespace loopclean {

// Distance bands, right-open so every finite d >= 0 lands in exactly one:
// Good [0,2), Suspect [2,3), Anomalous [3,4), Severe [4,inf).
enum class DistanceBand { Good, Suspect, Anomalous, Severe };

DistanceBand band_of(double distance);
std::string_view band_name(DistanceBand band);
std::optional<DistanceBand> parse_band(std::string_view s);

struct ScoringOptions {
  double outlier_threshold = 2.5;  // is_outlier <=> distance > threshold
  enum class Assignment { Mahalanobis, Euclidean };
  // Metric used to pick the closest center. The reported distance is always
  // Mahalanobis to the assigned center.
  Assignment assignment = Assignment::Mahalanobis;
};

/// sqrt((x - center)^T  Sigma^-1  (x - center)); tiny negative quadratic
/// forms from rounding clamp to zero.
double mahalanobis(const Eigen::Vector3d& x, const Eigen::Vector3d& center,
                   const Eigen::Matrix3d& inverse_covariance);

struct Score {
  int regime_index = 0;  // index into the model's speed-ordered centers
  double distance = 0.0;
  DistanceBand band = DistanceBand::Good;
  bool is_outlier = false;
};

Score score_vector(const Eigen::Vector3d& raw, const ClusterModel& model,
                   const ScoringOptions& options = {});

// Empty when the observation is missing any feature.
std::optional<Score> try_score(const Observation& obs, const ClusterModel& model,
                               const ScoringOptions& options = {});

// Throwing form; raises MissingFeature instead of returning empty.
Score assign_and_score(const Observation& obs, const ClusterModel& model,
                       const ScoringOptions& options = {});

struct ScoredObservation {
  Observation observation;
  std::optional<Score> score;  // empty = unscoreable (missing feature)

  bool scoreable() const { return score.has_value(); }
};

struct ScoringResult {
  std::uint64_t model_fingerprint = 0;
  ScoringOptions options;
  std::vector<ScoredObservation> rows;  // input order; nothing dropped
  std::size_t unscoreable = 0;
};

ScoringResult score_dataset(const Dataset& dataset, const ClusterModel& model,
                            const ScoringOptions& options = {});

// Scored CSV: observation columns + regime_index, distance (6 decimals),
// band, is_outlier; unscoreable rows leave the score columns empty. The
// format comment carries the model fingerprint and threshold.
void write_scored_csv(const ScoringResult& result, const std::string& path);
ScoringResult read_scored_csv(const std::string& path);

}  // namespace loopclean
