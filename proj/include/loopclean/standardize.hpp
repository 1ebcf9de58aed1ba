#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "loopclean/dataset.hpp"

namespace loopclean {

// Per-feature z-score parameters, population standard deviation convention.
struct Standardization {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d stddev = Eigen::Vector3d::Ones();

  Eigen::Vector3d to_std(const Eigen::Vector3d& raw) const {
    return (raw - mean).cwiseQuotient(stddev);
  }
  Eigen::Vector3d from_std(const Eigen::Vector3d& z) const {
    return z.cwiseProduct(stddev) + mean;
  }
};

struct StandardizeResult {
  std::vector<Eigen::Vector3d> points;  // standardized complete rows, input order
  Standardization params;
  std::size_t excluded_missing = 0;  // rows dropped for missing features
};

// Raw feature triples for rows with all three features present.
std::vector<Eigen::Vector3d> complete_feature_rows(const Dataset& dataset,
                                                   std::size_t* excluded = nullptr);

// Throws DegeneratePartition when a feature column has zero variance or the
// input is empty after missing-feature exclusion.
StandardizeResult standardize(const std::vector<Eigen::Vector3d>& raw_points);
StandardizeResult standardize(const Dataset& dataset_partition);

}  // namespace loopclean
