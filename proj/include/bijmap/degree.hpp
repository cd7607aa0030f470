#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "bijmap/chain.hpp"
#include "bijmap/error.hpp"
#include "bijmap/mesh.hpp"
#include "bijmap/simplicial_map.hpp"

namespace bijmap {

struct DegreeOptions {
  double eps_geo_rel = 1e-9;         ///< genericity threshold, times the image bounding-box diameter
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  int max_retries = 64;              ///< ray directions tried before giving up
};

/// Diagonal of the bounding box of all vertex images (1 if the box is a point).
inline double image_diameter(const SimplicialMap& map) {
  const Eigen::VectorXd lo = map.images().colwise().minCoeff();
  const Eigen::VectorXd hi = map.images().colwise().maxCoeff();
  const double d = (hi - lo).norm();
  return d > 0.0 ? d : 1.0;
}

namespace detail {

inline double point_segment_distance(const Eigen::VectorXd& q, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd e = b - a;
  const double len2 = e.squaredNorm();
  double s = len2 > 0.0 ? (q - a).dot(e) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * e - q).norm();
}

/// Distance from q to the convex hull of the columns of w (1, 2 or 3 points).
inline double point_simplex_distance(const Eigen::VectorXd& q, const Eigen::MatrixXd& w) {
  const auto k = w.cols();
  if (k == 1) return (w.col(0) - q).norm();
  if (k == 2) return point_segment_distance(q, w.col(0), w.col(1));
  if (k == 3) {
    const Eigen::VectorXd e1 = w.col(1) - w.col(0);
    const Eigen::VectorXd e2 = w.col(2) - w.col(0);
    Eigen::Matrix2d gram;
    gram << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
    const Eigen::Vector2d rhs(e1.dot(q - w.col(0)), e2.dot(q - w.col(0)));
    if (std::abs(gram.determinant()) > 1e-300) {
      const Eigen::Vector2d beta = gram.ldlt().solve(rhs);
      if (beta(0) >= 0.0 && beta(1) >= 0.0 && beta.sum() <= 1.0) {
        return (w.col(0) + beta(0) * e1 + beta(1) * e2 - q).norm();
      }
    }
    return std::min({point_segment_distance(q, w.col(0), w.col(1)), point_segment_distance(q, w.col(1), w.col(2)),
                     point_segment_distance(q, w.col(2), w.col(0))});
  }
  throw ParameterError("distance to simplices of dimension > 2 is not supported");
}

/// Distance from point a to the half-line q + t p, t >= 0 (p unit).
inline double point_ray_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& q, const Eigen::VectorXd& p) {
  const double t = std::max(0.0, (a - q).dot(p));
  return (q + t * p - a).norm();
}

/// Distance between segment [a, b] and the half-line q + t p, t >= 0 (p unit).
inline double segment_ray_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& p) {
  const Eigen::VectorXd e = b - a;
  double best = std::min(point_ray_distance(a, q, p), point_ray_distance(b, q, p));
  best = std::min(best, point_segment_distance(q, a, b));
  // interior stationary point of |q + t p - a - s e|^2
  const double pe = p.dot(e), ee = e.dot(e);
  const Eigen::VectorXd r = q - a;
  const double den = ee - pe * pe;  // p unit
  if (den > 1e-300) {
    const double s = (e.dot(r) - pe * p.dot(r)) / den;
    const double t = s * pe - p.dot(r);
    if (s > 0.0 && s < 1.0 && t > 0.0) best = std::min(best, (q + t * p - a - s * e).norm());
  }
  return best;
}

inline Eigen::MatrixXd oriented_images(const SimplicialMap& map, const std::vector<int>& verts) {
  Eigen::MatrixXd w(map.dim(), verts.size());
  for (std::size_t k = 0; k < verts.size(); ++k) w.col(k) = map.image(verts[k]);
  return w;
}

inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

inline void validate_cycle(const SimplicialMap& map, const Chain& cycle) {
  if (cycle.dim() != map.dim() - 1) throw StructuralError("degree needs a (d-1)-chain");
  for (const auto& [key, coef] : cycle.terms()) {
    if (!map.mesh().has_face(key)) throw StructuralError("cycle references a face that is not in the mesh");
  }
  if (!is_cycle(cycle)) throw StructuralError("chain is not a cycle");
}

}  // namespace detail

/// Distance from q to the image of the support of a chain.
inline double distance_to_chain_image(const SimplicialMap& map, const Chain& c, const Eigen::VectorXd& q) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [key, coef] : c.terms()) {
    best = std::min(best, detail::point_simplex_distance(q, detail::oriented_images(map, key)));
  }
  return best;
}

/// Distance from q to the union of the images of all (d-1)-faces (the set Y).
inline double distance_to_facet_images(const SimplicialMap& map, const Eigen::VectorXd& q) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& key : map.mesh().facets()) {
    best = std::min(best, detail::point_simplex_distance(q, detail::oriented_images(map, key)));
  }
  return best;
}

/// deg(Phi_q, c): the signed number of times the image of the cycle wraps
/// around q. Computed by casting a ray from q in a random direction and summing
/// coefficient * orientation sign over the faces it crosses; directions passing
/// within eps_geo of the image of a (d-2)-face are redrawn. For d = 2 this is
/// the winding number of the image polygon(s). Supported for d = 1, 2, 3.
inline int cycle_degree(const SimplicialMap& map, const Chain& cycle, const Eigen::VectorXd& q,
                        const DegreeOptions& opts = {}) {
  const int d = map.dim();
  if (d < 1 || d > 3) throw ParameterError("cycle degree is implemented for d = 1, 2, 3");
  if (q.size() != d) throw InputError("query point has the wrong dimension");
  detail::validate_cycle(map, cycle);
  const double eps = opts.eps_geo_rel * image_diameter(map);
  if (cycle.empty()) return 0;
  if (distance_to_chain_image(map, cycle, q) <= eps) {
    throw DegreeUndefinedError("query point lies on the image of the cycle");
  }
  const auto terms = cycle.oriented_terms();

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    Eigen::VectorXd p(d);
    for (int i = 0; i < d; ++i) p(i) = gauss(rng);
    if (p.norm() < 1e-6) continue;
    p.normalize();
    if (d == 1) {
      // S_q is the pair {q - 1, q + 1}; pick one side and count the points there
      const int side = p(0) > 0 ? 1 : -1;
      std::int64_t deg = 0;
      for (const auto& [verts, coef] : terms) {
        if (detail::sign_of(map.image(verts[0])(0) - q(0)) == side) deg += coef * side;
      }
      return static_cast<int>(deg);
    }
    // genericity: stay away from the images of the (d-2)-faces
    bool generic = true;
    for (const auto& [verts, coef] : terms) {
      const Eigen::MatrixXd w = detail::oriented_images(map, verts);
      if (d == 2) {
        for (int k = 0; k < 2 && generic; ++k) generic = detail::point_ray_distance(w.col(k), q, p) > eps;
      } else {
        for (int a = 0; a < 3 && generic; ++a) {
          generic = detail::segment_ray_distance(w.col(a), w.col((a + 1) % 3), q, p) > eps;
        }
      }
      if (!generic) break;
    }
    if (!generic) continue;

    std::int64_t deg = 0;
    for (const auto& [verts, coef] : terms) {
      const Eigen::MatrixXd w = detail::oriented_images(map, verts);
      Eigen::MatrixXd sys(d, d);
      sys.col(0) = p;
      for (int k = 1; k < d; ++k) sys.col(k) = -(w.col(k) - w.col(0));
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
      if (!lu.isInvertible()) continue;  // ray parallel to the face: no transversal crossing
      const Eigen::VectorXd sol = lu.solve(Eigen::VectorXd(w.col(0) - q));
      const double t = sol(0);
      double bsum = 0.0;
      bool inside = t > 0.0;
      for (int k = 1; k < d && inside; ++k) {
        inside = sol(k) > 0.0;
        bsum += sol(k);
      }
      if (!inside || bsum >= 1.0) continue;
      Eigen::MatrixXd rel(d, d);
      for (int k = 0; k < d; ++k) rel.col(k) = w.col(k) - q;
      deg += coef * detail::sign_of(rel.determinant());
    }
    return static_cast<int>(deg);
  }
  throw DegreeUndefinedError("no generic ray direction found after " + std::to_string(opts.max_retries) +
                             " attempts");
}

/// deg(c1 + c2) == deg(c1) + deg(c2), each degree evaluated with its own ray.
inline bool degree_additivity_check(const SimplicialMap& map, const Chain& c1, const Chain& c2,
                                    const Eigen::VectorXd& q, const DegreeOptions& opts = {}) {
  DegreeOptions o1 = opts, o2 = opts, o3 = opts;
  o2.seed = opts.seed + 0x1234567ULL;
  o3.seed = opts.seed + 0x89abcdefULL;
  const int lhs = cycle_degree(map, c1 + c2, q, o1);
  return lhs == cycle_degree(map, c1, q, o2) + cycle_degree(map, c2, q, o3);
}

/// deg(Phi_q, boundary of face j): 1 when q is inside the image of a positively
/// oriented face, 0 when outside (-1 inside a reversed face).
inline int face_boundary_degree(const SimplicialMap& map, int face_id, const Eigen::VectorXd& q,
                                const DegreeOptions& opts = {}) {
  if (face_id < 0 || face_id >= map.mesh().num_faces()) throw StructuralError("face id out of range");
  return cycle_degree(map, face_boundary_chain(map.mesh(), face_id), q, opts);
}

struct PreimageWitness {
  int face_id = -1;
  Eigen::VectorXd barycentric;  ///< weights of the face corners, in face order
  FaceKey support;              ///< smallest face containing the point
};

struct PreimageCount {
  Eigen::VectorXd q;
  int count = 0;
  std::vector<PreimageWitness> witnesses;  ///< one per distinct pre-image
  int skipped_degenerate = 0;              ///< faces with degenerate image, not searched
};

/// Counts distinct points x of M with Phi(x) = q by solving for barycentric
/// coordinates face by face. Solutions on a shared face are merged: two
/// witnesses are the same point when they have the same support face and the
/// same weights on it.
inline PreimageCount preimage_count(const SimplicialMap& map, const Eigen::VectorXd& q, double bary_tol = 1e-10) {
  const int d = map.dim();
  if (q.size() != d) throw InputError("query point has the wrong dimension");
  PreimageCount out;
  out.q = q;
  struct Found {
    FaceKey support;
    std::vector<double> weights;  // aligned with support
    PreimageWitness witness;
  };
  std::vector<Found> found;
  for (int j = 0; j < map.mesh().num_faces(); ++j) {
    const auto& f = map.mesh().face(j);
    const Eigen::MatrixXd u = map.face_images(j);
    Eigen::MatrixXd sys(d + 1, d + 1);
    sys.topRows(d) = u;
    sys.row(d).setOnes();
    Eigen::MatrixXd edges(d, d);
    for (int k = 0; k < d; ++k) edges.col(k) = u.col(k + 1) - u.col(0);
    if (std::abs(normalized_determinant(edges)) <= 1e-12) {
      ++out.skipped_degenerate;
      continue;
    }
    Eigen::VectorXd rhs(d + 1);
    rhs.head(d) = q;
    rhs(d) = 1.0;
    Eigen::VectorXd beta = sys.partialPivLu().solve(rhs);
    if (beta.minCoeff() < -bary_tol) continue;
    for (int k = 0; k <= d; ++k) {
      if (beta(k) < bary_tol) beta(k) = 0.0;
    }
    beta /= beta.sum();
    std::vector<std::pair<int, double>> support;
    for (int k = 0; k <= d; ++k) {
      if (beta(k) > 0.0) support.emplace_back(f[k], beta(k));
    }
    std::sort(support.begin(), support.end());
    Found cand;
    for (const auto& [v, w] : support) {
      cand.support.push_back(v);
      cand.weights.push_back(w);
    }
    bool duplicate = false;
    for (const auto& other : found) {
      if (other.support != cand.support) continue;
      double diff = 0.0;
      for (std::size_t k = 0; k < cand.weights.size(); ++k) diff = std::max(diff, std::abs(other.weights[k] - cand.weights[k]));
      if (diff <= 1e-8) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    cand.witness.face_id = j;
    cand.witness.barycentric = beta;
    cand.witness.support = cand.support;
    found.push_back(std::move(cand));
  }
  for (auto& f : found) out.witnesses.push_back(std::move(f.witness));
  out.count = static_cast<int>(out.witnesses.size());
  return out;
}

struct PreimageCheck {
  int preimages = 0;
  int degree = 0;
  bool inequality_holds = false;  ///< preimages <= degree
  bool equality_expected = false; ///< q avoids Y, the images of all (d-1)-faces
  bool equality_holds = false;    ///< preimages == degree
};

/// Compares the pre-image count of q with deg(Phi_q, boundary of M).
/// Rejects q within eps_geo of the image of the boundary.
inline PreimageCheck theorem4_check(const SimplicialMap& map, const Eigen::VectorXd& q,
                                     const DegreeOptions& opts = {}) {
  const Chain bd = boundary_cycle(map.mesh());
  const double eps = opts.eps_geo_rel * image_diameter(map);
  if (distance_to_chain_image(map, bd, q) <= eps) {
    throw DegreeUndefinedError("query point is too close to the image of the mesh boundary");
  }
  PreimageCheck r;
  r.degree = cycle_degree(map, bd, q, opts);
  r.preimages = preimage_count(map, q).count;
  r.inequality_holds = r.preimages <= r.degree;
  r.equality_expected = distance_to_facet_images(map, q) > eps;
  r.equality_holds = r.preimages == r.degree;
  return r;
}

}  // namespace bijmap
