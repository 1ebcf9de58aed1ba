#include "loopclean/standardize.hpp"

#include <cmath>
#include <string>

#include "loopclean/errors.hpp"

namespace loopclean {

std::vector<Eigen::Vector3d> complete_feature_rows(const Dataset& dataset, std::size_t* excluded) {
  std::vector<Eigen::Vector3d> rows;
  rows.reserve(dataset.observations.size());
  std::size_t missing = 0;
  for (const auto& obs : dataset.observations) {
    if (auto f = feature_vector(obs)) {
      rows.push_back(*f);
    } else {
      ++missing;
    }
  }
  if (excluded) *excluded = missing;
  return rows;
}

StandardizeResult standardize(const std::vector<Eigen::Vector3d>& raw_points) {
  if (raw_points.empty()) throw DegeneratePartition("no complete rows to standardize");
  const double n = static_cast<double>(raw_points.size());

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : raw_points) mean += p;
  mean /= n;

  Eigen::Vector3d sumsq = Eigen::Vector3d::Zero();
  for (const auto& p : raw_points) {
    const Eigen::Vector3d d = p - mean;
    sumsq += d.cwiseProduct(d);
  }
  const Eigen::Vector3d variance = sumsq / n;

  StandardizeResult result;
  for (int i = 0; i < 3; ++i) {
    if (variance[i] <= 0.0) {
      throw DegeneratePartition("feature '" + std::string(kFeatureOrder[static_cast<std::size_t>(i)]) +
                                "' has zero variance");
    }
    result.params.stddev[i] = std::sqrt(variance[i]);
  }
  result.params.mean = mean;

  result.points.reserve(raw_points.size());
  for (const auto& p : raw_points) result.points.push_back(result.params.to_std(p));
  return result;
}

StandardizeResult standardize(const Dataset& dataset_partition) {
  std::size_t excluded = 0;
  auto rows = complete_feature_rows(dataset_partition, &excluded);
  StandardizeResult result = standardize(rows);
  result.excluded_missing = excluded;
  return result;
}

}  // namespace loopclean
