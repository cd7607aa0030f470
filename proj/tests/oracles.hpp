#pragma once

// Reference computations written independently of the library, used as test
// oracles.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

/// Winding number of a closed polyline around q by summing signed turning angles.
inline int winding_by_angles(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& q) {
  const double pi = std::acos(-1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d a = poly[i] - q, b = poly[(i + 1) % poly.size()] - q;
    total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  }
  return static_cast<int>(std::lround(total / (2 * pi)));
}

/// Signed winding of a list of oriented segments around q (angle summation).
inline int winding_of_segments(const std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>>& segs,
                               const std::vector<long long>& coefs, const Eigen::Vector2d& q) {
  const double pi = std::acos(-1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Eigen::Vector2d a = segs[i].first - q, b = segs[i].second - q;
    total += coefs[i] * std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  }
  return static_cast<int>(std::lround(total / (2 * pi)));
}

/// 1 if q is strictly inside triangle abc (either orientation), via barycentric signs.
inline int inside_triangle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                           const Eigen::Vector2d& q) {
  Eigen::Matrix3d M;
  M << a.x(), b.x(), c.x(), a.y(), b.y(), c.y(), 1, 1, 1;
  const Eigen::Vector3d w = M.partialPivLu().solve(Eigen::Vector3d(q.x(), q.y(), 1.0));
  return (w.minCoeff() > 0) ? 1 : 0;
}

/// Orientation sign of triangle abc.
inline int orientation(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const double s = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  return (s > 0) - (s < 0);
}

/// Ray-cast point-in-polygon (even-odd), independent of the library's winding code.
inline bool inside_polygon(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& q) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > q.y()) != (b.y() > q.y()) && q.x() < (b.x() - a.x()) * (q.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      in = !in;
    }
  }
  return in;
}

/// Distance from q to segment ab.
inline double segment_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& q) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - q).norm();
}

/// Distance from q to the infinite line through a and b.
inline double line_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& q) {
  const Eigen::Vector2d ab = (b - a).normalized();
  const Eigen::Vector2d r = q - a;
  return std::abs(ab.x() * r.y() - ab.y() * r.x());
}

/// Singular values of a 2x2 matrix in closed form (largest first).
inline std::pair<double, double> singular_values(const Eigen::Matrix2d& A) {
  const double e = (A(0, 0) + A(1, 1)) / 2, f = (A(0, 0) - A(1, 1)) / 2;
  const double g = (A(1, 0) + A(0, 1)) / 2, h = (A(1, 0) - A(0, 1)) / 2;
  const double qn = std::hypot(e, h), rn = std::hypot(f, g);
  return {qn + rn, std::abs(qn - rn)};
}

}  // namespace oracle
