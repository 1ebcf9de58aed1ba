#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

namespace loopclean {

struct KMeansOptions {
  int max_iterations = 300;
  double tolerance = 1e-6;  // max center movement, standardized units
};

struct KMeansResult {
  std::vector<Eigen::Vector3d> centers;  // unsorted, standardized units
  double average_squared_error = 0.0;    // total within-cluster squared error / n
  int iterations = 0;
  int best_restart = 0;
  std::vector<double> restart_errors;  // final average squared error per restart
  std::vector<double> error_trace;     // per-iteration error of the best restart
};

/// Lloyd iterations from the given initial centers. Runs to an assignment
/// fixpoint or until the largest center movement drops below the tolerance.
/// A cluster that loses all members is reseeded at the point farthest from
/// its nearest center.
KMeansResult kmeans_lloyd(const std::vector<Eigen::Vector3d>& points,
                          std::vector<Eigen::Vector3d> initial_centers,
                          const KMeansOptions& options = {});

/// Best of `restarts` k-means++ seeded runs, by final squared error; ties
/// keep the earliest restart. Restart r draws from the substream
/// derive_seed(seed, r), so results are reproducible bit for bit.
/// Throws TooFewDistinctPoints when the input has fewer than k distinct
/// points.
KMeansResult kmeans_fit(const std::vector<Eigen::Vector3d>& points, int k, std::uint64_t seed,
                        int restarts = 10, const KMeansOptions& options = {});

struct ElbowPoint {
  int k = 0;
  double average_squared_error = 0.0;
};

struct ElbowCurve {
  std::vector<ElbowPoint> points;  // k strictly increasing
};

ElbowCurve elbow_sweep(const std::vector<Eigen::Vector3d>& points, int k_min, int k_max,
                       std::uint64_t seed, int restarts = 10, const KMeansOptions& options = {});

/// Knee of the error curve: the k whose point lies farthest from the chord
/// joining the curve's first and last points; ties break toward smaller k.
/// The override parameter is the domain-knowledge channel and wins outright.
/// Throws CurveTooShort for curves with fewer than 3 points.
int select_k_knee(const ElbowCurve& curve, std::optional<int> override_k = std::nullopt);

}  // namespace loopclean
