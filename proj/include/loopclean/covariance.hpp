#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

namespace loopclean {

// Ridge values tried in order until the matrix inverts with an acceptable
// condition number.
inline constexpr std::array<double, 4> kRidgeSchedule{0.0, 1e-9, 1e-6, 1e-3};
inline constexpr double kMaxConditionNumber = 1e12;

/// Sample covariance (divisor n-1) of raw feature vectors; symmetric by
/// construction. Throws TooFewPoints for fewer than 2 points.
Eigen::Matrix3d estimate_covariance(const std::vector<Eigen::Vector3d>& points);

struct RidgeInverse {
  Eigen::Matrix3d inverse;        // inverse of (M + epsilon * I)
  double epsilon = 0.0;           // ridge actually used
  double condition_number = 0.0;  // of the regularized matrix
};

/// Inverts a symmetric matrix through its eigendecomposition, adding the
/// smallest ridge from the schedule that makes it invertible with condition
/// number below the cap. Throws NotInvertible when the whole schedule fails.
RidgeInverse invert_regularized(const Eigen::Matrix3d& symmetric,
                                std::span<const double> schedule = kRidgeSchedule,
                                double max_condition = kMaxConditionNumber);

}  // namespace loopclean
