#pragma once

#include <string>
#include <vector>

#include "loopclean/scoring.hpp"

namespace loopclean {

struct ClusterStats {
  int cluster_index = 0;
  Eigen::Vector3d center_raw = Eigen::Vector3d::Zero();
  std::size_t member_count = 0;
  double member_fraction = 0.0;      // of scoreable rows
  std::string top_detector;          // empty for an empty cluster
  double top_detector_share = 0.0;   // in (0,1] when the cluster has members
  bool flagged = false;
  std::string flag_reason;           // comma-separated rule ids
};

struct ClusterReport {
  std::uint64_t model_fingerprint = 0;
  std::size_t scored_rows = 0;  // rows with all features present
  std::vector<ClusterStats> clusters;

  std::string to_json_text() const;
};

/// Per-cluster membership counts, fractions, and detector concentration.
/// Throws ModelMismatch when the scored rows reference another model.
ClusterReport cluster_report(const ClusterModel& model, const ScoringResult& scored);

// A cluster is flagged when any rule fires:
//   stuck_high_occupancy       center occupancy >= 90 and speed <= 10
//   single_detector_dominated  top-detector share >= 0.9 and fraction >= 0.01
struct AnomalyRules {
  double stuck_occupancy_min = 90.0;
  double stuck_speed_max = 10.0;
  double dominance_share_min = 0.9;
  double dominance_fraction_min = 0.01;
};

ClusterReport flag_anomalous_clusters(ClusterReport report, const AnomalyRules& rules = {});

/// Directional drift between two center sets: for each center of A, the
/// Euclidean distance to the closest center of B, summed. Zero exactly when
/// every center of A coincides with one of B.
struct DriftResult {
  double value = 0.0;
  std::vector<double> contributions;  // per center of A
  std::string basis;                  // standardization basis descriptor

  std::string to_json_text() const;
};

DriftResult cluster_set_distance(const std::vector<Eigen::Vector3d>& centers_a,
                                 const std::vector<Eigen::Vector3d>& centers_b,
                                 std::string basis = "standardized");

// Compares models in the standardized units of A's model: B's raw centers
// are re-standardized with A's parameters. The symmetric variant takes the
// larger of the two directions.
DriftResult cluster_set_distance(const ClusterModel& a, const ClusterModel& b,
                                 bool symmetric = false);

struct RefitResult {
  ClusterModel model;
  ClusterReport report;
};

/// Refits the partition with one extra cluster and reports on the result;
/// the usual follow-up when a cluster set looks wrong at the base k.
RefitResult refit_with_extra_cluster(const Dataset& partition, int k_base,
                                     const FitOptions& options, const SegmentKey& segment,
                                     TemporalGroup group, const AnomalyRules& rules = {});

}  // namespace loopclean
