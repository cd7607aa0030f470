#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bijmap/error.hpp"
#include "bijmap/mesh.hpp"
#include "bijmap/polygon.hpp"
#include "bijmap/simplicial_map.hpp"

namespace bijmap {

/// The single boundary loop of a disk-topology triangle mesh. Boundary edge i
/// runs from loop vertex i to loop vertex i+1; boundary vertex i sits between
/// boundary edges i-1 and i.
inline const std::vector<int>& disk_boundary_loop(const SimplicialMesh& mesh) {
  if (mesh.dim() != 2) throw ParameterError("boundary assignments are implemented for triangle meshes");
  const auto& loops = mesh.boundary().loops;
  if (loops.size() != 1) {
    throw UnsupportedTopologyError("mesh has " + std::to_string(loops.size()) +
                                   " boundary loops; only disk topology is supported");
  }
  return loops.front();
}

/// Boundary vertex constrained to the line point + s * direction.
struct FreeOnLine {
  Eigen::Vector2d point;
  Eigen::Vector2d direction;  ///< unit
  int polygon_edge = -1;
};

/// Boundary vertex fixed at the intersection of two supporting lines.
struct Pinned {
  Eigen::Vector2d point;
  int polygon_vertex = -1;  ///< index of the polygon vertex when the lines are adjacent edges, else -1
};

using VertexPin = std::variant<FreeOnLine, Pinned>;

/// Assignment of every boundary edge of a disk mesh to a polygon edge,
/// together with the vertex constraints it implies: a boundary vertex between
/// edges assigned to non-parallel lines is pinned to their intersection,
/// otherwise it slides on the common line.
class BoundaryAssignment {
 public:
  BoundaryAssignment(const SimplicialMesh& mesh, const Polytope2& polygon, std::vector<int> edge_to_polyedge)
      : edge_to_polyedge_(std::move(edge_to_polyedge)) {
    const auto& loop = disk_boundary_loop(mesh);
    loop_ = loop;
    const int L = static_cast<int>(loop.size());
    if (static_cast<int>(edge_to_polyedge_.size()) != L) {
      throw InputError("assignment covers " + std::to_string(edge_to_polyedge_.size()) + " boundary edges, mesh has " +
                       std::to_string(L));
    }
    for (int i = 0; i < L; ++i) {
      const int e = edge_to_polyedge_[i];
      if (e < 0 || e >= polygon.size()) {
        throw InputError("boundary edge " + std::to_string(i) + " assigned to polygon edge " + std::to_string(e) +
                         " out of range");
      }
    }
    pins_.reserve(L);
    const double tol = 1e-12;
    for (int i = 0; i < L; ++i) {
      const int before = edge_to_polyedge_[(i + L - 1) % L];
      const int after = edge_to_polyedge_[i];
      const Eigen::Vector2d da = polygon.edge_direction(before), db = polygon.edge_direction(after);
      const double c = detail::cross2(da, db);
      if (before == after || std::abs(c) <= tol) {
        // distinct parallel lines only arise when the assignment skips a
        // polygon edge; assignment_feasibility reports that case
        pins_.emplace_back(FreeOnLine{polygon.edge_start(after), db, after});
        continue;
      }
      // intersection of the two supporting lines
      const Eigen::Vector2d pa = polygon.edge_start(before), pb = polygon.edge_start(after);
      const double s = detail::cross2(pb - pa, db) / c;
      const Eigen::Vector2d x = pa + s * da;
      int pv = -1;
      if ((before + 1) % polygon.size() == after) pv = after;
      if ((after + 1) % polygon.size() == before) pv = before;
      pins_.emplace_back(Pinned{x, pv});
    }
  }

  const std::vector<int>& edge_to_polyedge() const { return edge_to_polyedge_; }
  int polyedge(int boundary_edge) const { return edge_to_polyedge_[boundary_edge]; }
  /// Mesh vertex indices of the boundary loop.
  const std::vector<int>& loop() const { return loop_; }
  int num_boundary_edges() const { return static_cast<int>(loop_.size()); }
  /// Derived constraint of boundary vertex i (loop position).
  const std::vector<VertexPin>& derived_pins() const { return pins_; }

 private:
  std::vector<int> edge_to_polyedge_;
  std::vector<int> loop_;
  std::vector<VertexPin> pins_;
};

/// Splits the boundary loop into `polygon_edges` runs of near-equal length,
/// run k assigned to polygon edge k, starting at boundary edge `start`.
inline std::vector<int> uniform_assignment(int boundary_edges, int polygon_edges, int start = 0) {
  if (boundary_edges < polygon_edges) throw InputError("fewer boundary edges than polygon edges");
  std::vector<int> out(boundary_edges);
  for (int i = 0; i < boundary_edges; ++i) {
    const int k = static_cast<int>((static_cast<long long>(i) * polygon_edges) / boundary_edges);
    out[(i + start) % boundary_edges] = k;
  }
  return out;
}

struct Feasibility {
  bool feasible = false;
  std::string reason;       ///< empty when feasible
  int uncovered_edge = -1;  ///< first polygon edge with no boundary edge, if any
  int winding = 0;          ///< number of times the assignment wraps the polygon
};

/// Combinatorial topological-feasibility test for disk meshes: walking the
/// boundary loop in its induced orientation, the assigned polygon-edge indices
/// must advance by 0 or 1 (mod E) at every step, cover every polygon edge, and
/// wrap around the polygon exactly once.
inline Feasibility assignment_feasibility(const SimplicialMesh& mesh, const Polytope2& polygon,
                                          const BoundaryAssignment& A) {
  disk_boundary_loop(mesh);
  const auto& a = A.edge_to_polyedge();
  const int L = static_cast<int>(a.size());
  const int E = polygon.size();
  Feasibility out;
  std::vector<int> hits(E, 0);
  for (int e : a) ++hits[e];
  for (int k = 0; k < E; ++k) {
    if (hits[k] == 0) {
      out.uncovered_edge = k;
      out.reason = "polygon edge " + std::to_string(k) + " receives no boundary edge";
      break;
    }
  }
  long long advance = 0;
  std::string skip;
  for (int i = 0; i < L; ++i) {
    const int step = ((a[(i + 1) % L] - a[i]) % E + E) % E;
    if (step > 1 && skip.empty()) {
      skip = "assignment jumps from polygon edge " + std::to_string(a[i]) + " to " + std::to_string(a[(i + 1) % L]) +
             " after boundary edge " + std::to_string(i);
    }
    advance += step;
  }
  out.winding = static_cast<int>(advance / E);
  if (!out.reason.empty()) return out;
  if (!skip.empty()) {
    out.reason = skip;
    return out;
  }
  if (out.winding != 1) {
    out.reason = "assignment winds " + std::to_string(out.winding) + " times around the polygon";
    return out;
  }
  out.feasible = true;
  return out;
}

enum class Theorem { necessary, T1, T2, T3 };
enum class Verdict { certified, refuted };

inline const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::necessary: return "necessary";
    case Theorem::T1: return "T1";
    case Theorem::T2: return "T2";
    case Theorem::T3: return "T3";
  }
  return "?";
}

inline const char* to_string(Verdict v) { return v == Verdict::certified ? "certified" : "refuted"; }

/// One reason a certificate was refuted.
struct Evidence {
  std::string kind;   ///< e.g. "flipped_face", "line_residual", "non_monotone"
  int index = -1;     ///< face id, loop position or polygon edge, depending on kind
  double residual = 0.0;
  std::string message;
};

struct Certificate {
  Theorem theorem = Theorem::necessary;
  Verdict verdict = Verdict::refuted;
  std::vector<Evidence> evidence;
  double tolerance = 0.0;  ///< absolute tolerance the residuals were compared against

  bool certified() const { return verdict == Verdict::certified; }
};

struct CertifyOptions {
  double eps_det = 1e-12;       ///< relative degeneracy threshold for det(A_j)
  double eps_con_rel = 1e-8;    ///< constraint residual tolerance, times the polygon diameter
  double eps_mono_rel = 1e-9;   ///< strict monotonicity threshold, times the polygon edge length
};

namespace detail {

inline Certificate finish(Certificate c) {
  c.verdict = c.evidence.empty() ? Verdict::certified : Verdict::refuted;
  return c;
}

inline void append_necessary(const SimplicialMap& map, double eps_det, std::vector<Evidence>& ev) {
  const OrientationReport rep = orientation_report(map, eps_det);
  for (int j : rep.degenerate_faces) {
    ev.push_back({"degenerate_face", j, rep.determinants[j], "face " + std::to_string(j) + " is degenerate"});
  }
  // the pipeline certifies the orientation-preserving branch only
  for (int j : rep.negative_faces) {
    ev.push_back({"flipped_face", j, rep.determinants[j], "face " + std::to_string(j) + " reverses orientation"});
  }
}

inline Eigen::Vector2d image2(const SimplicialMap& map, int v) { return map.images().row(v).transpose(); }

}  // namespace detail

/// Non-degenerate and orientation preserving on every face.
inline Certificate check_necessary(const SimplicialMap& map, const CertifyOptions& opts = {}) {
  Certificate c;
  c.theorem = Theorem::necessary;
  c.tolerance = opts.eps_det;
  detail::append_necessary(map, opts.eps_det, c.evidence);
  return detail::finish(std::move(c));
}

/// Bijective boundary map onto the polygon boundary plus the necessary
/// condition. The boundary test walks the loop: every boundary vertex image
/// lies on the polygon boundary, every boundary edge image runs forward along
/// it (arc length advanced equals the chord), and one full walk advances
/// exactly one perimeter.
inline Certificate certify_T1(const SimplicialMap& map, const Polytope2& polygon, const CertifyOptions& opts = {}) {
  Certificate c;
  c.theorem = Theorem::T1;
  const double eps = opts.eps_con_rel * polygon.diameter();
  c.tolerance = eps;
  detail::append_necessary(map, opts.eps_det, c.evidence);
  if (map.dim() != 2) throw ParameterError("T1 certificates are implemented for triangle meshes");
  const auto& loops = map.mesh().boundary().loops;
  if (loops.size() != 1) {
    c.evidence.push_back({"boundary_loops", static_cast<int>(loops.size()), 0.0,
                          "a map with several boundary loops cannot be bijective onto a polygon boundary"});
    return detail::finish(std::move(c));
  }
  const auto& loop = loops.front();
  const int L = static_cast<int>(loop.size());
  const double per = polygon.perimeter();
  std::vector<double> param(L);
  bool all_on = true;
  for (int i = 0; i < L; ++i) {
    const Eigen::Vector2d u = detail::image2(map, loop[i]);
    const double dist = polygon.boundary_distance(u);
    if (dist > eps) {
      all_on = false;
      c.evidence.push_back({"off_boundary", i, dist,
                            "boundary vertex " + std::to_string(loop[i]) + " maps off the polygon boundary"});
    }
    param[i] = polygon.perimeter_parameter(u);
  }
  if (!all_on) return detail::finish(std::move(c));
  double total = 0.0;
  for (int i = 0; i < L; ++i) {
    double step = param[(i + 1) % L] - param[i];
    if (step < 0) step += per;
    // parameters that coincide up to round-off count as no advance
    if (step > per - eps) step -= per;
    const double chord = (detail::image2(map, loop[(i + 1) % L]) - detail::image2(map, loop[i])).norm();
    if (step <= eps) {
      c.evidence.push_back({"non_injective_boundary", i, step,
                            "boundary edge " + std::to_string(i) + " does not advance along the polygon boundary"});
    } else if (std::abs(step - chord) > eps) {
      c.evidence.push_back({"edge_off_boundary", i, std::abs(step - chord),
                            "boundary edge " + std::to_string(i) + " cuts across the polygon"});
    }
    total += std::max(step, 0.0);
  }
  if (std::abs(total - per) > eps * L) {
    c.evidence.push_back({"boundary_winding", -1, total / per,
                          "boundary images advance " + std::to_string(total / per) + " perimeters instead of one"});
  }
  return detail::finish(std::move(c));
}

/// Interior injectivity and onto-ness under a sliding boundary: necessary
/// condition, every boundary edge on the line of its assigned polygon edge,
/// and every derived pin satisfied. Throws PreconditionError if the
/// assignment is not topologically feasible.
inline Certificate certify_T2(const SimplicialMap& map, const Polytope2& polygon, const BoundaryAssignment& A,
                              const CertifyOptions& opts = {}) {
  const Feasibility feas = assignment_feasibility(map.mesh(), polygon, A);
  if (!feas.feasible) throw PreconditionError("assignment is not topologically feasible: " + feas.reason);
  Certificate c;
  c.theorem = Theorem::T2;
  const double eps = opts.eps_con_rel * polygon.diameter();
  c.tolerance = eps;
  detail::append_necessary(map, opts.eps_det, c.evidence);
  const auto& loop = A.loop();
  const int L = static_cast<int>(loop.size());
  for (int i = 0; i < L; ++i) {
    const int pe = A.polyedge(i);
    for (int k = 0; k < 2; ++k) {
      const int v = loop[(i + k) % L];
      const double r = polygon.line_distance(pe, detail::image2(map, v));
      if (r > eps) {
        c.evidence.push_back({"line_residual", (i + k) % L, r,
                              "boundary vertex " + std::to_string(v) + " is off the line of polygon edge " +
                                  std::to_string(pe)});
      }
    }
  }
  const auto& pins = A.derived_pins();
  for (int i = 0; i < L; ++i) {
    if (const auto* pin = std::get_if<Pinned>(&pins[i])) {
      const double r = (detail::image2(map, loop[i]) - pin->point).norm();
      if (r > eps) {
        c.evidence.push_back({"pin_residual", i, r,
                              "boundary vertex " + std::to_string(loop[i]) + " is not at its pinned corner"});
      }
    }
  }
  return detail::finish(std::move(c));
}

/// T2 plus orientation preservation on the boundary. For each polygon edge the
/// boundary edges assigned to it must map with positive length in its
/// direction, and (the d = 1 base case) the vertex images along the run must
/// increase strictly from the edge's start corner to its end corner.
inline Certificate certify_T3(const SimplicialMap& map, const Polytope2& polygon, const BoundaryAssignment& A,
                              const CertifyOptions& opts = {}) {
  Certificate t2 = certify_T2(map, polygon, A, opts);
  Certificate c;
  c.theorem = Theorem::T3;
  c.tolerance = t2.tolerance;
  c.evidence = t2.evidence;
  const auto& loop = A.loop();
  const int L = static_cast<int>(loop.size());
  const double eps = t2.tolerance;
  // locate run starts: boundary edges whose predecessor has another polygon edge
  for (int i = 0; i < L; ++i) {
    const int pe = A.polyedge(i);
    if (A.polyedge((i + L - 1) % L) == pe) continue;
    const Eigen::Vector2d a = polygon.edge_start(pe);
    const Eigen::Vector2d dir = polygon.edge_direction(pe);
    const double len = polygon.edge_length(pe);
    const double eps_mono = opts.eps_mono_rel * len;
    int k = i;
    double prev = (detail::image2(map, loop[k]) - a).dot(dir);
    if (std::abs(prev) > eps) {
      c.evidence.push_back({"run_start", k, prev,
                            "run on polygon edge " + std::to_string(pe) + " does not start at its corner"});
    }
    int steps = 0;
    while (A.polyedge(k) == pe && steps < L) {
      const int next = (k + 1) % L;
      const double cur = (detail::image2(map, loop[next]) - a).dot(dir);
      const double delta = cur - prev;
      if (delta < -eps_mono) {
        c.evidence.push_back({"boundary_orientation", k, delta,
                              "boundary edge " + std::to_string(k) + " is reversed on polygon edge " +
                                  std::to_string(pe)});
      } else if (delta <= eps_mono) {
        c.evidence.push_back({"non_monotone", k, delta,
                              "boundary edge " + std::to_string(k) + " does not advance strictly on polygon edge " +
                                  std::to_string(pe)});
      }
      prev = cur;
      k = next;
      ++steps;
    }
    if (std::abs(prev - len) > eps) {
      c.evidence.push_back({"run_end", k, prev - len,
                            "run on polygon edge " + std::to_string(pe) + " does not end at its corner"});
    }
  }
  return detail::finish(std::move(c));
}

inline std::string describe(const Certificate& c) {
  std::ostringstream os;
  os << to_string(c.theorem) << ' ' << to_string(c.verdict);
  for (const auto& e : c.evidence) os << "\n  " << e.kind << " [" << e.index << "] " << e.residual << ": " << e.message;
  return os.str();
}

}  // namespace bijmap
