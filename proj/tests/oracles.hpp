#pragma once

#include <array>
#include <cmath>

namespace loopclean::testing {

// Test-only Mahalanobis oracle: explicit cofactor inverse and handwritten
// quadratic form on plain arrays. Deliberately independent of the library's
// eigendecomposition route (and of Eigen altogether).
using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

inline Mat3 cofactor_inverse(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 inv;
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

inline double mahalanobis_bruteforce(const Vec3& x, const Vec3& center, const Mat3& covariance) {
  const Mat3 inv = cofactor_inverse(covariance);
  const Vec3 d{x[0] - center[0], x[1] - center[1], x[2] - center[2]};
  double q = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) q += d[i] * inv[i][j] * d[j];
  }
  return std::sqrt(q);
}

// Survival function of the chi-square distribution with 3 degrees of
// freedom: P(X > x) = erfc(sqrt(x/2)) + sqrt(2x/pi) * exp(-x/2).
inline double chi3_tail(double x) {
  return std::erfc(std::sqrt(x / 2.0)) +
         std::sqrt(2.0 * x / 3.14159265358979323846) * std::exp(-x / 2.0);
}

}  // namespace loopclean::testing
