#include "loopclean/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "loopclean/errors.hpp"
#include "loopclean/rng.hpp"

namespace loopclean {

namespace {

std::size_t count_distinct(std::vector<Eigen::Vector3d> pts) {
  auto less = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[2] < b[2];
  };
  std::sort(pts.begin(), pts.end(), less);
  auto end = std::unique(pts.begin(), pts.end(),
                         [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a == b; });
  return static_cast<std::size_t>(end - pts.begin());
}

// D^2-weighted seeding.
std::vector<Eigen::Vector3d> kmeanspp_seed(const std::vector<Eigen::Vector3d>& points, int k,
                                           Rng& rng) {
  const std::size_t n = points.size();
  std::vector<Eigen::Vector3d> centers;
  centers.reserve(static_cast<std::size_t>(k));
  centers.push_back(points[rng.below(n)]);

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points[i] - centers[0]).squaredNorm();

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double w : d2) total += w;
    std::size_t idx = n - 1;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += d2[i];
        if (cumulative > r) {
          idx = i;
          break;
        }
      }
    } else {
      idx = rng.below(n);
    }
    centers.push_back(points[idx]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points[i] - centers.back()).squaredNorm());
    }
  }
  return centers;
}

}  // namespace

KMeansResult kmeans_lloyd(const std::vector<Eigen::Vector3d>& points,
                          std::vector<Eigen::Vector3d> centers, const KMeansOptions& options) {
  if (centers.empty()) throw Error("kmeans_lloyd: no initial centers");
  if (points.empty()) throw TooFewPoints("kmeans_lloyd: no points");
  const std::size_t n = points.size();
  const std::size_t k = centers.size();

  KMeansResult result;
  std::vector<int> assignment(n, -1);
  std::vector<int> previous(n, -1);
  std::vector<double> min_d2(n, 0.0);

  auto assign_all = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d2 = (points[i] - centers[0]).squaredNorm();
      for (std::size_t c = 1; c < k; ++c) {
        const double d2 = (points[i] - centers[c]).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = static_cast<int>(c);
        }
      }
      assignment[i] = best;
      min_d2[i] = best_d2;
      total += best_d2;
    }
    return total;
  };

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double total = assign_all();
    result.error_trace.push_back(total / static_cast<double>(n));

    if (iter > 0 && assignment == previous) break;  // fixpoint
    previous = assignment;

    std::vector<Eigen::Vector3d> sums(k, Eigen::Vector3d::Zero());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(assignment[i])] += points[i];
      ++counts[static_cast<std::size_t>(assignment[i])];
    }

    bool reseeded = false;
    std::vector<std::size_t> used_for_reseed;
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed at the point farthest from its nearest center.
        std::size_t far = 0;
        double far_d2 = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (std::find(used_for_reseed.begin(), used_for_reseed.end(), i) !=
              used_for_reseed.end()) {
            continue;
          }
          if (min_d2[i] > far_d2) {
            far_d2 = min_d2[i];
            far = i;
          }
        }
        centers[c] = points[far];
        used_for_reseed.push_back(far);
        reseeded = true;
        continue;
      }
      const Eigen::Vector3d updated = sums[c] / static_cast<double>(counts[c]);
      movement = std::max(movement, (updated - centers[c]).norm());
      centers[c] = updated;
    }
    if (!reseeded && movement < options.tolerance) {
      ++iter;
      break;
    }
  }

  const double final_total = assign_all();
  result.error_trace.push_back(final_total / static_cast<double>(n));
  result.centers = std::move(centers);
  result.average_squared_error = final_total / static_cast<double>(n);
  result.iterations = iter;
  return result;
}

KMeansResult kmeans_fit(const std::vector<Eigen::Vector3d>& points, int k, std::uint64_t seed,
                        int restarts, const KMeansOptions& options) {
  if (k < 1) throw Error("kmeans_fit: k must be >= 1");
  if (restarts < 1) throw Error("kmeans_fit: restarts must be >= 1");
  const std::size_t distinct = count_distinct(points);
  if (distinct < static_cast<std::size_t>(k)) {
    throw TooFewDistinctPoints("kmeans_fit: k=" + std::to_string(k) + " but only " +
                               std::to_string(distinct) + " distinct points");
  }

  KMeansResult best;
  std::vector<double> restart_errors;
  restart_errors.reserve(static_cast<std::size_t>(restarts));
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    KMeansResult run = kmeans_lloyd(points, kmeanspp_seed(points, k, rng), options);
    restart_errors.push_back(run.average_squared_error);
    if (r == 0 || run.average_squared_error < best.average_squared_error) {
      best = std::move(run);
      best.best_restart = r;
    }
  }
  best.restart_errors = std::move(restart_errors);
  return best;
}

ElbowCurve elbow_sweep(const std::vector<Eigen::Vector3d>& points, int k_min, int k_max,
                       std::uint64_t seed, int restarts, const KMeansOptions& options) {
  if (k_min < 1 || k_min > k_max) throw Error("elbow_sweep: need 1 <= k_min <= k_max");
  ElbowCurve curve;
  for (int k = k_min; k <= k_max; ++k) {
    const KMeansResult fit = kmeans_fit(points, k, seed, restarts, options);
    curve.points.push_back(ElbowPoint{k, fit.average_squared_error});
  }
  return curve;
}

int select_k_knee(const ElbowCurve& curve, std::optional<int> override_k) {
  if (override_k) return *override_k;
  if (curve.points.size() < 3) {
    throw CurveTooShort("knee selection needs at least 3 curve points, got " +
                        std::to_string(curve.points.size()));
  }
  const double x0 = curve.points.front().k;
  const double y0 = curve.points.front().average_squared_error;
  const double x1 = curve.points.back().k;
  const double y1 = curve.points.back().average_squared_error;
  const double chord = std::hypot(x1 - x0, y1 - y0);

  int best_k = curve.points.front().k;
  double best_distance = 0.0;
  for (const auto& p : curve.points) {
    const double cross = (x1 - x0) * (y0 - p.average_squared_error) - (x0 - p.k) * (y1 - y0);
    const double distance = std::abs(cross) / chord;
    if (distance > best_distance) {
      best_distance = distance;
      best_k = p.k;
    }
  }
  return best_k;
}

}  // namespace loopclean
