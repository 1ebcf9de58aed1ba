#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loopclean/covariance.hpp"
#include "loopclean/dataset.hpp"
#include "loopclean/kmeans.hpp"
#include "loopclean/standardize.hpp"

namespace loopclean {

struct ModelMetadata {
  SegmentKey segment;
  TemporalGroup group = TemporalGroup::All;
  std::string date_range;  // "firstT..lastT" of the training partition
  std::uint64_t seed = 0;
  int restarts = 0;
  std::size_t training_rows = 0;
  std::size_t excluded_missing = 0;
};

/// Fitted regime model. Centers are kept both in raw units (for reporting)
/// and standardized units, sorted ascending by the speed coordinate. The
/// covariance is the global raw-unit covariance of the training partition;
/// its inverse is regularized by `ridge_epsilon` from the standard schedule.
struct ClusterModel {
  static constexpr int kFormatVersion = 1;

  int k = 0;
  Standardization standardization;
  std::vector<Eigen::Vector3d> centers_raw;
  std::vector<Eigen::Vector3d> centers_std;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d inverse_covariance = Eigen::Matrix3d::Identity();
  double ridge_epsilon = 0.0;
  double average_squared_error = 0.0;
  ModelMetadata metadata;

  // FNV-1a hash of the canonical serialized form; scored outputs carry it so
  // downstream reports can detect model mixups.
  std::uint64_t fingerprint() const;

  std::string to_json_text() const;
  static ClusterModel from_json_text(const std::string& text);

  void save(const std::string& path) const;
  static ClusterModel load(const std::string& path);

  // Enforced on construction and reload: sizes, positive stddev,
  // speed-ascending centers, symmetric covariance, and
  // (covariance + epsilon I) * inverse == identity within 1e-8.
  void check_invariants() const;
};

/// De-standardizes and speed-orders the fitted centers, then attaches the
/// training partition's raw covariance and its regularized inverse.
ClusterModel finalize_model(const KMeansResult& fit, const Standardization& params,
                            const std::vector<Eigen::Vector3d>& raw_training_points,
                            ModelMetadata metadata);

struct FitOptions {
  std::optional<int> k;  // fixed cluster count; unset selects by knee
  int k_min = 1;
  int k_max = 10;
  std::uint64_t seed = 1;
  int restarts = 10;
  KMeansOptions kmeans;
};

struct FitResult {
  ClusterModel model;
  std::optional<ElbowCurve> curve;  // present when k was knee-selected
};

/// Standardize -> (optional elbow sweep + knee) -> k-means -> finalize.
FitResult fit_model(const Dataset& training_partition, const FitOptions& options,
                    const SegmentKey& segment, TemporalGroup group);

}  // namespace loopclean
