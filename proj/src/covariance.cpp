#include "loopclean/covariance.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "loopclean/errors.hpp"

namespace loopclean {

Eigen::Matrix3d estimate_covariance(const std::vector<Eigen::Vector3d>& points) {
  if (points.size() < 2) {
    throw TooFewPoints("covariance needs at least 2 points, got " + std::to_string(points.size()));
  }
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());

  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - mean;
    sum += d * d.transpose();
  }
  return sum / static_cast<double>(points.size() - 1);
}

RidgeInverse invert_regularized(const Eigen::Matrix3d& symmetric, std::span<const double> schedule,
                                double max_condition) {
  // The solver reads the lower triangle only, so any asymmetry in the input
  // is resolved toward that triangle.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(symmetric);
  const Eigen::Vector3d lambda = solver.eigenvalues();
  const Eigen::Matrix3d& vectors = solver.eigenvectors();

  for (double epsilon : schedule) {
    const Eigen::Vector3d shifted = lambda.array() + epsilon;
    const double min_abs = shifted.cwiseAbs().minCoeff();
    const double max_abs = shifted.cwiseAbs().maxCoeff();
    if (min_abs <= 0.0) continue;
    const double condition = max_abs / min_abs;
    if (condition >= max_condition) continue;
    RidgeInverse result;
    result.inverse = vectors * shifted.cwiseInverse().asDiagonal() * vectors.transpose();
    result.epsilon = epsilon;
    result.condition_number = condition;
    return result;
  }
  throw NotInvertible("matrix not invertible within the ridge schedule (eigenvalues " +
                      std::to_string(lambda[0]) + ", " + std::to_string(lambda[1]) + ", " +
                      std::to_string(lambda[2]) + ")");
}

}  // namespace loopclean
