#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bijmap/error.hpp"

namespace bijmap {

namespace detail {

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

inline bool segments_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                               const Eigen::Vector2d& d) {
  auto orient = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
    const double v = cross2(q - p, r - p);
    return (v > 0) - (v < 0);
  };
  auto on_segment = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
    return std::min(p.x(), q.x()) <= r.x() && r.x() <= std::max(p.x(), q.x()) && std::min(p.y(), q.y()) <= r.y() &&
           r.y() <= std::max(p.y(), q.y());
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace detail

/// A simple counterclockwise polygon with no two consecutive edges collinear.
/// Edge i runs from vertex i to vertex i+1 (cyclically).
class Polytope2 {
 public:
  /// Validates strictly: collinear consecutive edges are rejected.
  explicit Polytope2(std::vector<Eigen::Vector2d> vertices) : vertices_(std::move(vertices)) { validate(); }

  /// Merges runs of collinear consecutive edges (and repeated points) before
  /// validating. `edge_map`, when given, receives for each input edge the index
  /// of the merged edge that contains it.
  static Polytope2 merged(const std::vector<Eigen::Vector2d>& pts, std::vector<int>* edge_map = nullptr) {
    const int n = static_cast<int>(pts.size());
    if (n < 3) throw ParameterError("polygon needs at least 3 vertices");
    double scale = 0.0;
    for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    const double tol = 1e-12 * std::max(scale, 1.0);
    // a vertex is kept iff its incoming and outgoing edges turn
    std::vector<char> keep(n, 0);
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d& prev = pts[(i + n - 1) % n];
      const Eigen::Vector2d& cur = pts[i];
      const Eigen::Vector2d& next = pts[(i + 1) % n];
      const Eigen::Vector2d a = cur - prev, b = next - cur;
      if (a.norm() <= tol || b.norm() <= tol) continue;
      const bool straight = std::abs(detail::cross2(a, b)) <= tol * (a.norm() + b.norm()) && a.dot(b) > 0;
      keep[i] = !straight;
    }
    std::vector<int> kept;
    for (int i = 0; i < n; ++i) {
      if (keep[i]) kept.push_back(i);
    }
    if (kept.size() < 3) throw ParameterError("polygon has zero area after merging collinear edges");
    std::vector<Eigen::Vector2d> out;
    for (int i : kept) out.push_back(pts[i]);
    if (edge_map) {
      edge_map->assign(n, 0);
      // input edge i belongs to the merged edge that starts at the last kept vertex at or before i
      for (int i = 0; i < n; ++i) {
        int best = static_cast<int>(kept.size()) - 1;
        for (std::size_t k = 0; k < kept.size(); ++k) {
          if (kept[k] <= i) best = static_cast<int>(k);
        }
        (*edge_map)[i] = best;
      }
    }
    return Polytope2(std::move(out));
  }

  int size() const { return static_cast<int>(vertices_.size()); }
  const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }
  const Eigen::Vector2d& vertex(int i) const { return vertices_[((i % size()) + size()) % size()]; }
  Eigen::Vector2d edge_start(int e) const { return vertex(e); }
  Eigen::Vector2d edge_end(int e) const { return vertex(e + 1); }
  Eigen::Vector2d edge_vector(int e) const { return edge_end(e) - edge_start(e); }
  double edge_length(int e) const { return edge_vector(e).norm(); }
  /// Unit direction of edge e (counterclockwise traversal).
  Eigen::Vector2d edge_direction(int e) const { return edge_vector(e).normalized(); }
  /// Outward unit normal of edge e.
  Eigen::Vector2d edge_normal(int e) const {
    const Eigen::Vector2d t = edge_direction(e);
    return {t.y(), -t.x()};
  }

  double signed_area() const {
    double a = 0.0;
    for (int i = 0; i < size(); ++i) a += detail::cross2(vertex(i), vertex(i + 1));
    return 0.5 * a;
  }
  double area() const { return std::abs(signed_area()); }

  double perimeter() const {
    double p = 0.0;
    for (int e = 0; e < size(); ++e) p += edge_length(e);
    return p;
  }

  double diameter() const {
    double d = 0.0;
    for (int i = 0; i < size(); ++i) {
      for (int j = i + 1; j < size(); ++j) d = std::max(d, (vertex(i) - vertex(j)).norm());
    }
    return d;
  }

  /// Perimeter parameter at which edge e starts.
  double edge_offset(int e) const {
    double s = 0.0;
    for (int k = 0; k < e; ++k) s += edge_length(k);
    return s;
  }

  /// Distance from p to the infinite line supporting edge e.
  double line_distance(int e, const Eigen::Vector2d& p) const {
    return std::abs(detail::cross2(edge_direction(e), p - edge_start(e)));
  }

  /// Distance from p to the segment of edge e.
  double segment_distance(int e, const Eigen::Vector2d& p) const {
    const Eigen::Vector2d a = edge_start(e), v = edge_vector(e);
    const double s = std::clamp((p - a).dot(v) / v.squaredNorm(), 0.0, 1.0);
    return (a + s * v - p).norm();
  }

  /// Distance from p to the boundary polygon.
  double boundary_distance(const Eigen::Vector2d& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (int e = 0; e < size(); ++e) best = std::min(best, segment_distance(e, p));
    return best;
  }

  /// Perimeter parameter (in [0, perimeter)) of the boundary point nearest to p.
  double perimeter_parameter(const Eigen::Vector2d& p) const {
    double best = std::numeric_limits<double>::infinity();
    double param = 0.0;
    double offset = 0.0;
    for (int e = 0; e < size(); ++e) {
      const Eigen::Vector2d a = edge_start(e), v = edge_vector(e);
      const double s = std::clamp((p - a).dot(v) / v.squaredNorm(), 0.0, 1.0);
      const double dist = (a + s * v - p).norm();
      if (dist < best) {
        best = dist;
        param = offset + s * v.norm();
      }
      offset += v.norm();
    }
    return param >= offset ? param - offset : param;
  }

  /// Boundary point at perimeter parameter s (taken modulo the perimeter).
  Eigen::Vector2d point_at(double s) const {
    const double per = perimeter();
    s = std::fmod(s, per);
    if (s < 0) s += per;
    for (int e = 0; e < size(); ++e) {
      const double len = edge_length(e);
      if (s <= len || e == size() - 1) return edge_start(e) + std::min(s / len, 1.0) * edge_vector(e);
      s -= len;
    }
    return vertex(0);
  }

  /// Winding number of the boundary around p (1 inside, 0 outside; p off the boundary).
  int winding_number(const Eigen::Vector2d& p) const {
    int wn = 0;
    for (int i = 0; i < size(); ++i) {
      const Eigen::Vector2d a = vertex(i), b = vertex(i + 1);
      if (a.y() <= p.y()) {
        if (b.y() > p.y() && detail::cross2(b - a, p - a) > 0) ++wn;
      } else if (b.y() <= p.y() && detail::cross2(b - a, p - a) < 0) {
        --wn;
      }
    }
    return wn;
  }

  bool contains(const Eigen::Vector2d& p) const { return winding_number(p) != 0; }

  /// Distance from p to Z, the union of the lines supporting the edges.
  double lines_distance(const Eigen::Vector2d& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (int e = 0; e < size(); ++e) best = std::min(best, line_distance(e, p));
    return best;
  }

 private:
  void validate() {
    const int n = size();
    if (n < 3) throw ParameterError("polygon needs at least 3 vertices");
    double scale = 0.0;
    for (const auto& p : vertices_) {
      if (!p.allFinite()) throw ParameterError("polygon vertex is not finite");
      scale = std::max(scale, p.cwiseAbs().maxCoeff());
    }
    const double tol = 1e-12 * std::max(scale, 1.0);
    for (int i = 0; i < n; ++i) {
      if (edge_length(i) <= tol) throw ParameterError("polygon edge " + std::to_string(i) + " has zero length");
    }
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d a = edge_vector(i - 1 + n), b = edge_vector(i);
      if (std::abs(detail::cross2(a, b)) <= tol * (a.norm() + b.norm())) {
        throw ParameterError("polygon edges " + std::to_string((i - 1 + n) % n) + " and " + std::to_string(i) +
                             " are collinear");
      }
    }
    if (!(signed_area() > tol * tol)) {
      throw ParameterError(signed_area() < 0 ? "polygon is not counterclockwise" : "polygon has zero area");
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;
        if (detail::segments_intersect(edge_start(i), edge_end(i), edge_start(j), edge_end(j))) {
          throw ParameterError("polygon is not simple: edges " + std::to_string(i) + " and " + std::to_string(j) +
                               " intersect");
        }
      }
    }
  }

  std::vector<Eigen::Vector2d> vertices_;
};

}  // namespace bijmap
