#include "loopclean/kmeans.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "loopclean/errors.hpp"
#include "loopclean/rng.hpp"
#include "loopclean/standardize.hpp"

using namespace loopclean;

namespace {

// Planted mixture of spherical Gaussian blobs; the generator parameters are
// the oracle the recovery tests check against.
std::vector<Eigen::Vector3d> planted_blobs(const std::vector<Eigen::Vector3d>& means, double sd,
                                           std::size_t per_blob, std::uint64_t seed) {
  std::vector<Eigen::Vector3d> points;
  Rng rng(seed);
  for (const auto& mean : means) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      points.push_back(mean + sd * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()));
    }
  }
  return points;
}

Eigen::Vector3d mean_of(const std::vector<Eigen::Vector3d>& points) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

}  // namespace

TEST_CASE("k=1 returns the mean, the analytic optimum") {
  Rng rng(3);
  std::vector<Eigen::Vector3d> points;
  for (int i = 0; i < 500; ++i) {
    points.emplace_back(rng.normal(), rng.normal() * 2.0, rng.uniform01());
  }
  const KMeansResult fit = kmeans_fit(points, 1, 42, 3);
  REQUIRE(fit.centers.size() == 1);
  CHECK((fit.centers[0] - mean_of(points)).norm() < 1e-12);
}

TEST_CASE("k equal to the distinct point count drives the error to zero") {
  // Duplicated points keep the distinct count at 4.
  std::vector<Eigen::Vector3d> points;
  const std::vector<Eigen::Vector3d> distinct = {
      {0, 0, 0}, {5, 1, 0}, {0, 7, 2}, {3, 3, 3}};
  for (int copy = 0; copy < 3; ++copy) {
    points.insert(points.end(), distinct.begin(), distinct.end());
  }
  const KMeansResult fit = kmeans_fit(points, 4, 7, 5);
  CHECK(fit.average_squared_error == 0.0);
}

TEST_CASE("fewer distinct points than k is an error") {
  std::vector<Eigen::Vector3d> points = {{1, 1, 1}, {1, 1, 1}, {2, 2, 2}, {2, 2, 2}};
  CHECK_THROWS_AS(kmeans_fit(points, 3, 1, 2), TooFewDistinctPoints);
  CHECK_NOTHROW(kmeans_fit(points, 2, 1, 2));
}

TEST_CASE("planted 3-blob recovery within 0.1 standardized units") {
  const std::vector<Eigen::Vector3d> means = {{0, 0, 0}, {20, 0, 0}, {0, 20, 20}};
  const double sd = 1.0;  // separation is 20 sd
  const auto raw = planted_blobs(means, sd, 1000, 2024);
  const StandardizeResult standardized = standardize(raw);

  const KMeansResult fit = kmeans_fit(standardized.points, 3, 7, 10);
  for (const auto& mean : means) {
    const Eigen::Vector3d target = standardized.params.to_std(mean);
    double best = 1e9;
    for (const auto& c : fit.centers) best = std::min(best, (c - target).norm());
    CHECK(best < 0.1);
  }
}

TEST_CASE("lloyd error trace is non-increasing") {
  Rng rng(17);
  std::vector<Eigen::Vector3d> points;
  for (int i = 0; i < 800; ++i) {
    points.emplace_back(rng.uniform01() * 10, rng.uniform01() * 10, rng.uniform01() * 10);
  }
  for (int k : {2, 3, 5}) {
    const KMeansResult fit = kmeans_fit(points, k, 5, 4);
    for (std::size_t i = 1; i < fit.error_trace.size(); ++i) {
      CHECK(fit.error_trace[i] <= fit.error_trace[i - 1] + 1e-12);
    }
  }
}

TEST_CASE("reported error is the best of all restarts") {
  Rng rng(29);
  std::vector<Eigen::Vector3d> points;
  for (int i = 0; i < 600; ++i) {
    points.emplace_back(rng.normal() * 3, rng.normal(), rng.normal());
  }
  const KMeansResult fit = kmeans_fit(points, 4, 11, 8);
  REQUIRE(fit.restart_errors.size() == 8);
  for (double e : fit.restart_errors) CHECK(fit.average_squared_error <= e);
  CHECK(fit.average_squared_error ==
        *std::min_element(fit.restart_errors.begin(), fit.restart_errors.end()));
}

TEST_CASE("identical seeds reproduce centers bit for bit") {
  const auto points = planted_blobs({{0, 0, 0}, {8, 8, 0}}, 1.0, 400, 5);
  const KMeansResult a = kmeans_fit(points, 2, 123, 5);
  const KMeansResult b = kmeans_fit(points, 2, 123, 5);
  REQUIRE(a.centers.size() == b.centers.size());
  for (std::size_t i = 0; i < a.centers.size(); ++i) {
    CHECK(a.centers[i] == b.centers[i]);  // exact equality, not approximate
  }
  CHECK(a.average_squared_error == b.average_squared_error);
}

TEST_CASE("warm-started lloyd reseeds clusters that lose every member") {
  // Three tight groups; one initial center sits far from all data and
  // captures nothing on the first assignment.
  const auto points = planted_blobs({{0, 0, 0}, {10, 0, 0}, {0, 10, 0}}, 0.3, 50, 31);
  std::vector<Eigen::Vector3d> initial = {
      {0, 0, 0}, {10, 0, 0}, {500, 500, 500}};
  const KMeansResult fit = kmeans_lloyd(points, initial);
  // The far center must have been reseeded onto real data: all three final
  // centers are near distinct blobs and the error is small.
  double worst = 0.0;
  for (const auto& c : fit.centers) {
    double nearest = 1e18;
    for (const auto& m : {Eigen::Vector3d{0, 0, 0}, {10, 0, 0}, {0, 10, 0}}) {
      nearest = std::min(nearest, (c - m).norm());
    }
    worst = std::max(worst, nearest);
  }
  CHECK(worst < 1.0);
  CHECK(fit.average_squared_error < 1.0);
}

TEST_CASE("elbow curve flattens after the true k") {
  const std::vector<Eigen::Vector3d> means = {{0, 0, 0}, {15, 0, 0}, {0, 15, 15}};
  const auto raw = planted_blobs(means, 1.0, 700, 99);
  const StandardizeResult standardized = standardize(raw);
  const ElbowCurve curve = elbow_sweep(standardized.points, 1, 10, 3, 5);

  REQUIRE(curve.points.size() == 10);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].average_squared_error <=
          curve.points[i - 1].average_squared_error + 1e-9);
  }
  const double drop_to_true_k =
      curve.points[1].average_squared_error - curve.points[2].average_squared_error;
  const double drop_after =
      curve.points[2].average_squared_error - curve.points[3].average_squared_error;
  CHECK(drop_to_true_k > 5.0 * drop_after);
  CHECK(select_k_knee(curve) == 3);
}

TEST_CASE("single blob: standardized error at k=1 is the feature count") {
  const auto raw = planted_blobs({{50, 8, 12}}, 2.0, 3000, 41);
  const StandardizeResult standardized = standardize(raw);
  const ElbowCurve curve = elbow_sweep(standardized.points, 1, 4, 3, 3);
  // Standardized data has unit variance per axis, so ASE(k=1) = 3 exactly.
  CHECK(curve.points[0].average_squared_error == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("sweep past the distinct point count propagates the error") {
  std::vector<Eigen::Vector3d> points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_THROWS_AS(elbow_sweep(points, 1, 10, 1, 2), TooFewDistinctPoints);
}

namespace {

// Independent knee oracle: parameterize the chord and use the projection
// residual, a different route than the implementation's cross product.
int knee_by_projection(const ElbowCurve& curve) {
  const double x0 = curve.points.front().k, y0 = curve.points.front().average_squared_error;
  const double x1 = curve.points.back().k, y1 = curve.points.back().average_squared_error;
  const double ux = x1 - x0, uy = y1 - y0;
  const double len2 = ux * ux + uy * uy;
  int best_k = curve.points.front().k;
  double best = -1.0;
  for (const auto& p : curve.points) {
    const double px = p.k - x0, py = p.average_squared_error - y0;
    const double t = (px * ux + py * uy) / len2;
    const double rx = px - t * ux, ry = py - t * uy;
    const double dist = std::sqrt(rx * rx + ry * ry);
    if (dist > best + 1e-15) {
      best = dist;
      best_k = p.k;
    }
  }
  return best_k;
}

ElbowCurve curve_of(const std::vector<double>& errors) {
  ElbowCurve curve;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    curve.points.push_back({static_cast<int>(i) + 1, errors[i]});
  }
  return curve;
}

}  // namespace

TEST_CASE("knee selection on a classic elbow curve") {
  const ElbowCurve curve = curve_of({100, 40, 15, 12, 10, 9, 8.5, 8, 7.8, 7.6});
  CHECK(knee_by_projection(curve) == 3);  // oracle agrees
  CHECK(select_k_knee(curve) == 3);
}

TEST_CASE("knee oracle agreement on random convex-ish curves") {
  Rng rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> errors;
    double value = 50.0 + rng.uniform01() * 100.0;
    for (int k = 0; k < 10; ++k) {
      errors.push_back(value);
      value *= 0.3 + 0.65 * rng.uniform01();
    }
    const ElbowCurve curve = curve_of(errors);
    CHECK(select_k_knee(curve) == knee_by_projection(curve));
  }
}

TEST_CASE("knee override wins regardless of the curve") {
  const ElbowCurve curve = curve_of({100, 40, 15, 12, 10, 9, 8.5, 8, 7.8, 7.6});
  CHECK(select_k_knee(curve, 4) == 4);
}

TEST_CASE("a strictly linear curve falls back to the smallest k") {
  CHECK(select_k_knee(curve_of({50, 40, 30, 20, 10})) == 1);
}

TEST_CASE("short curves are rejected") {
  CHECK_THROWS_AS(select_k_knee(curve_of({5, 4})), CurveTooShort);
}
