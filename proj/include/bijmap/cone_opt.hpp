#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "bijmap/certify.hpp"
#include "bijmap/error.hpp"
#include "bijmap/mesh.hpp"
#include "bijmap/polygon.hpp"
#include "bijmap/simplicial_map.hpp"
#include "bijmap/socp.hpp"

namespace bijmap {

/// mu = (K - 1) / (K + 1): the cone bound that caps the condition number at K.
inline double mu_from_K(double K) {
  if (!(K > 1.0) || !std::isfinite(K)) throw ParameterError("condition-number bound K must be finite and > 1");
  return (K - 1.0) / (K + 1.0);
}

/// Normalizes a similarity matrix [[a, -b], [b, a]] to a rotation.
inline Eigen::Matrix2d closest_rotation(const Eigen::Matrix2d& B, double eps = 1e-12) {
  const double a = 0.5 * (B(0, 0) + B(1, 1));
  const double b = 0.5 * (B(1, 0) - B(0, 1));
  const double r = std::hypot(a, b);
  if (!(r > eps)) throw DegenerateFrameError("similarity part is too small to define a rotation");
  Eigen::Matrix2d R;
  R << a / r, -b / r, b / r, a / r;
  return R;
}

/// Bounded-distortion parameters: K, mu, one rotation per face, strict margin.
struct BDParams {
  double K = 15.0;
  double mu = 0.875;
  std::vector<Eigen::Matrix2d> rotations;
  double eps_margin = 0.0;

  /// Identity rotations on every face.
  static BDParams make(double K, int faces, double eps_margin) {
    BDParams p;
    p.K = K;
    p.mu = mu_from_K(K);
    p.rotations.assign(faces, Eigen::Matrix2d::Identity());
    p.eps_margin = eps_margin;
    return p;
  }

  void validate(int faces) const {
    if (!(mu > 0.0 && mu < 1.0)) throw ParameterError("mu must lie in (0, 1)");
    if (static_cast<int>(rotations.size()) != faces) throw ParameterError("one rotation per face is required");
    for (const auto& R : rotations) {
      if ((R.transpose() * R - Eigen::Matrix2d::Identity()).norm() > 1e-9 || R.determinant() < 0) {
        throw ParameterError("rotation is not orthogonal with determinant +1");
      }
    }
    if (eps_margin < 0) throw ParameterError("margin must be nonnegative");
  }
};

/// mu tr(R^T B) / sqrt(2) - |C|_F for a concrete Jacobian: positive iff the
/// bounded-distortion constraint holds strictly (before the margin).
inline double bd_slack(const Eigen::Matrix2d& A, const Eigen::Matrix2d& R, double mu) {
  const BCDecomposition bc = bc_decompose(A);
  return mu * (R.transpose() * bc.B).trace() / std::sqrt(2.0) - bc.C.norm();
}

/// Row-major entries a11, a12, a21, a22 of a Jacobian, affine in the program variables.
using JacobianExpr = std::array<AffineExpr, 4>;

/// |C|_F <= mu tr(R^T B) / sqrt(2) - margin (+ t when t >= 0 is a variable index),
/// written with B = [[b1, -b2], [b2, b1]] and C = [[c1, c2], [c2, -c1]] so that
/// |C|_F = sqrt(2) |(c1, c2)| and tr(R^T B) = 2 (cos b1 + sin b2).
inline SocConstraint bd_constraint(int face_id, const JacobianExpr& a, const Eigen::Matrix2d& R, double mu,
                                   double eps_margin, int t = -1) {
  const AffineExpr b1 = 0.5 * (a[0] + a[3]);
  const AffineExpr b2 = 0.5 * (a[2] - a[1]);
  const AffineExpr c1 = 0.5 * (a[0] - a[3]);
  const AffineExpr c2 = 0.5 * (a[1] + a[2]);
  const double r2 = std::sqrt(2.0);
  SocConstraint con;
  con.vec = {r2 * c1, r2 * c2};
  con.scalar = r2 * mu * (R(0, 0) * b1 + R(1, 0) * b2) - AffineExpr(eps_margin);
  if (t >= 0) con.scalar += AffineExpr::var(t);
  con.label = "bd[" + std::to_string(face_id) + "]";
  return con;
}

/// Writes every vertex image as an affine function of a reduced variable
/// vector: interior vertices carry two variables, boundary vertices sliding on
/// a line one, and pinned or prescribed vertices none. Linear boundary
/// constraints are therefore satisfied exactly by construction.
class VertexParameterization {
 public:
  /// Sliding boundary from an assignment: lines and derived pins.
  static VertexParameterization sliding(const SimplicialMesh& mesh, const BoundaryAssignment& A) {
    VertexParameterization p(mesh.num_vertices());
    const auto& loop = A.loop();
    for (std::size_t i = 0; i < loop.size(); ++i) {
      Slot& s = p.slots_[loop[i]];
      if (const auto* pin = std::get_if<Pinned>(&A.derived_pins()[i])) {
        s.kind = Kind::fixed;
        s.point = pin->point;
      } else {
        const auto& line = std::get<FreeOnLine>(A.derived_pins()[i]);
        s.kind = Kind::line;
        s.point = line.point;
        s.direction = line.direction;
      }
    }
    p.assign_indices();
    return p;
  }

  /// Every boundary vertex prescribed; `positions[i]` is the image of loop vertex i.
  static VertexParameterization fixed(const SimplicialMesh& mesh, const std::vector<Eigen::Vector2d>& positions) {
    const auto& loop = disk_boundary_loop(mesh);
    if (positions.size() != loop.size()) throw InputError("one boundary position per boundary vertex is required");
    VertexParameterization p(mesh.num_vertices());
    for (std::size_t i = 0; i < loop.size(); ++i) {
      p.slots_[loop[i]].kind = Kind::fixed;
      p.slots_[loop[i]].point = positions[i];
    }
    p.assign_indices();
    return p;
  }

  int num_variables() const { return count_; }

  /// Coordinate r of vertex v, with the variables starting at program index `first`.
  AffineExpr coord(int v, int r, int first) const {
    const Slot& s = slots_[v];
    switch (s.kind) {
      case Kind::interior: return AffineExpr::var(first + s.index + r);
      case Kind::line: return AffineExpr(s.point(r)) + AffineExpr::var(first + s.index, s.direction(r));
      case Kind::fixed: return AffineExpr(s.point(r));
    }
    return {};
  }

  Eigen::MatrixXd images(const Eigen::VectorXd& x, int first = 0) const {
    Eigen::MatrixXd out(slots_.size(), 2);
    for (std::size_t v = 0; v < slots_.size(); ++v) {
      const Slot& s = slots_[v];
      switch (s.kind) {
        case Kind::interior: out.row(v) << x(first + s.index), x(first + s.index + 1); break;
        case Kind::line: out.row(v) = (s.point + x(first + s.index) * s.direction).transpose(); break;
        case Kind::fixed: out.row(v) = s.point.transpose(); break;
      }
    }
    return out;
  }

  /// Variables reproducing `images` as closely as the parameterization allows.
  Eigen::VectorXd project(const Eigen::MatrixXd& images) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(count_);
    for (std::size_t v = 0; v < slots_.size(); ++v) {
      const Slot& s = slots_[v];
      const Eigen::Vector2d u = images.row(v).transpose();
      if (s.kind == Kind::interior) x.segment<2>(s.index) = u;
      if (s.kind == Kind::line) x(s.index) = (u - s.point).dot(s.direction);
    }
    return x;
  }

 private:
  enum class Kind { interior, line, fixed };
  struct Slot {
    Kind kind = Kind::interior;
    Eigen::Vector2d point = Eigen::Vector2d::Zero();
    Eigen::Vector2d direction = Eigen::Vector2d::Zero();
    int index = -1;
  };

  explicit VertexParameterization(int n) : slots_(n) {}

  void assign_indices() {
    count_ = 0;
    for (auto& s : slots_) {
      if (s.kind == Kind::interior) {
        s.index = count_;
        count_ += 2;
      } else if (s.kind == Kind::line) {
        s.index = count_;
        count_ += 1;
      }
    }
  }

  std::vector<Slot> slots_;
  int count_ = 0;
};

/// Jacobian of face j as affine expressions: A_j = U_j * linear_j.
inline JacobianExpr face_jacobian(const SimplicialMesh& mesh, const FaceFrame& frame, int j,
                                  const VertexParameterization& param, int first) {
  JacobianExpr a;
  const auto& f = mesh.face(j);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      AffineExpr e;
      for (int k = 0; k < 3; ++k) e += frame.linear(k, c) * param.coord(f[k], r, first);
      a[2 * r + c] = e;
    }
  }
  return a;
}

enum class Phase { feasibility, energy };

inline const char* to_string(Phase p) { return p == Phase::feasibility ? "feasibility" : "energy"; }

struct TraceEntry {
  double value = 0.0;          ///< t (feasibility) or Dirichlet energy (energy)
  double max_residual = 0.0;   ///< largest cone violation of the solver output
  SolveStatus solver_status = SolveStatus::numerical_error;
  int solver_iterations = 0;
  bool accepted = true;
};

struct SolveTrace {
  Phase phase = Phase::feasibility;
  std::vector<TraceEntry> iterations;
  std::shared_ptr<SimplicialMap> final_map;  ///< null if no usable map was produced
  std::vector<Eigen::Matrix2d> rotations;   ///< rotations the final map was solved with
  bool success = false;
  std::string message;

  int outer_iterations() const { return static_cast<int>(iterations.size()); }
};

struct ConeOptOptions {
  double K = 15.0;
  double eps_margin_rel = 1e-9;  ///< strict-inequality margin, times the polygon diameter
  int max_outer = 10;
  double tol_energy = 1e-6;      ///< relative energy decrease that counts as converged
  SolverSettings solver;
};

namespace detail {

inline double total_area(const std::vector<FaceFrame>& frames) {
  double a = 0.0;
  for (const auto& f : frames) a += f.volume;
  return a;
}

inline void require_planar_triangles(const SimplicialMesh& mesh, const std::vector<FaceFrame>& frames) {
  if (mesh.dim() != 2) throw ParameterError("cone optimization is implemented for triangle meshes");
  for (std::size_t j = 0; j < frames.size(); ++j) {
    if (frames[j].degenerate) throw InputError("source face " + std::to_string(j) + " is degenerate");
  }
}

/// Largest violation of |C| <= mu tr(R^T B)/sqrt(2) - margin over all faces.
inline double max_bd_violation(const SimplicialMap& map, const std::vector<Eigen::Matrix2d>& R, double mu,
                               double margin) {
  double v = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < map.mesh().num_faces(); ++j) {
    const Eigen::Matrix2d A = face_affine_map(map, j).linear_part;
    v = std::max(v, margin - bd_slack(A, R[j], mu));
  }
  return v;
}

inline std::vector<Eigen::Matrix2d> reset_rotations(const SimplicialMap& map, std::vector<Eigen::Matrix2d> R) {
  for (int j = 0; j < map.mesh().num_faces(); ++j) {
    const Eigen::Matrix2d A = face_affine_map(map, j).linear_part;
    try {
      R[j] = closest_rotation(bc_decompose(A).B);
    } catch (const DegenerateFrameError&) {
      // keep the previous rotation
    }
  }
  return R;
}

inline bool usable(SolveStatus s) { return s == SolveStatus::optimal || s == SolveStatus::near_optimal; }

/// Feasibility loop shared by the sliding and fixed-boundary variants.
inline SolveTrace run_feasibility(const std::shared_ptr<const SimplicialMesh>& mesh, const Polytope2& polygon,
                                  const VertexParameterization& param, BDParams params, const ConeOptOptions& opts) {
  const auto frames = make_face_frames(*mesh);
  require_planar_triangles(*mesh, frames);
  params.validate(mesh->num_faces());
  SolveTrace trace;
  trace.phase = Phase::feasibility;
  // a floor keeps min t bounded; it sits at the slack of a uniform similarity
  // of the right size, far below anything the constraints need
  const double scale = std::sqrt(polygon.area() / total_area(frames));
  const double floor = std::sqrt(2.0) * params.mu * scale;
  double best_t = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    ConeProgram prog;
    const int first = prog.add_variables("x", param.num_variables());
    const int t = prog.add_variable("t");
    for (int j = 0; j < mesh->num_faces(); ++j) {
      const auto a = face_jacobian(*mesh, frames[j], j, param, first);
      auto con = bd_constraint(j, a, params.rotations[j], params.mu, params.eps_margin, t);
      prog.add_cone(std::move(con.vec), std::move(con.scalar), std::move(con.label));
    }
    prog.add_nonnegative(AffineExpr::var(t) + AffineExpr(floor), "t_floor");
    prog.set_objective(AffineExpr::var(t));
    const SolveResult res = solve(prog, opts.solver);
    TraceEntry entry;
    entry.solver_status = res.status;
    entry.solver_iterations = res.iterations;
    if (!usable(res.status)) {
      entry.value = std::numeric_limits<double>::quiet_NaN();
      entry.accepted = false;
      trace.iterations.push_back(entry);
      trace.message = std::string("cone solver failed: ") + to_string(res.status);
      return trace;
    }
    auto map = std::make_shared<SimplicialMap>(mesh, param.images(res.x, first));
    // t read back from the map itself, not from the solver
    const double t_map = max_bd_violation(*map, params.rotations, params.mu, params.eps_margin);
    entry.value = t_map;
    entry.max_residual = std::max(0.0, prog.max_violation(res.x));
    trace.iterations.push_back(entry);
    const double previous_best = best_t;
    if (t_map < best_t) {
      best_t = t_map;
      trace.final_map = map;
      trace.rotations = params.rotations;
    }
    // t = 0 counts as infeasible: the constraints must hold strictly
    if (t_map < 0.0) {
      trace.success = true;
      trace.final_map = map;
      trace.rotations = params.rotations;
      return trace;
    }
    // rotation resets that no longer lower t will not reach t < 0
    if (outer > 0 && previous_best - t_map <= opts.tol_energy * std::max(floor, std::abs(previous_best))) {
      trace.message = "feasibility stalled after " + std::to_string(outer + 1) +
                      " outer iterations; best t = " + std::to_string(best_t);
      return trace;
    }
    params.rotations = reset_rotations(*map, params.rotations);
  }
  trace.message = "no strictly feasible map after " + std::to_string(opts.max_outer) +
                  " outer iterations; best t = " + std::to_string(best_t);
  return trace;
}

inline SolveTrace run_energy(const std::shared_ptr<const SimplicialMesh>& mesh, const VertexParameterization& param,
                             BDParams params, const SimplicialMap& start, const ConeOptOptions& opts) {
  const auto frames = make_face_frames(*mesh);
  require_planar_triangles(*mesh, frames);
  params.validate(mesh->num_faces());
  if (max_bd_violation(start, params.rotations, params.mu, params.eps_margin) >= 0.0) {
    throw PreconditionError("energy phase needs a strictly feasible start");
  }
  SolveTrace trace;
  trace.phase = Phase::energy;
  trace.final_map = std::make_shared<SimplicialMap>(start);
  trace.rotations = params.rotations;
  double energy = dirichlet_energy(start);
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    ConeProgram prog;
    const int first = prog.add_variables("x", param.num_variables());
    const int s = prog.add_variable("s");
    std::vector<AffineExpr> stacked;
    stacked.reserve(4 * mesh->num_faces());
    for (int j = 0; j < mesh->num_faces(); ++j) {
      const auto a = face_jacobian(*mesh, frames[j], j, param, first);
      const double w = std::sqrt(frames[j].volume);
      for (const auto& e : a) stacked.push_back(w * e);
      auto con = bd_constraint(j, a, params.rotations[j], params.mu, params.eps_margin);
      prog.add_cone(std::move(con.vec), std::move(con.scalar), std::move(con.label));
    }
    // epigraph of the energy: |sqrt(area_j) A_j|_2 <= s, minimizing s minimizes E_dir = s^2
    prog.add_cone(std::move(stacked), AffineExpr::var(s), "energy");
    prog.set_objective(AffineExpr::var(s));
    const SolveResult res = solve(prog, opts.solver);
    TraceEntry entry;
    entry.solver_status = res.status;
    entry.solver_iterations = res.iterations;
    if (!usable(res.status)) {
      entry.value = std::numeric_limits<double>::quiet_NaN();
      entry.accepted = false;
      trace.iterations.push_back(entry);
      trace.message = std::string("cone solver failed: ") + to_string(res.status) + "; returning best iterate";
      trace.success = false;
      return trace;
    }
    auto map = std::make_shared<SimplicialMap>(mesh, param.images(res.x, first));
    const double e_new = dirichlet_energy(*map);
    entry.value = e_new;
    entry.max_residual = std::max(0.0, max_bd_violation(*map, params.rotations, params.mu, params.eps_margin));
    // accepted iterates must be strictly feasible and must not raise the energy
    const bool feasible = max_bd_violation(*map, params.rotations, params.mu, 0.0) < 0.0;
    entry.accepted = feasible && e_new <= energy;
    trace.iterations.push_back(entry);
    if (!feasible) {
      trace.success = false;
      trace.message = "solver output violates the cone constraints; returning best iterate";
      return trace;
    }
    if (!entry.accepted) {
      // a rise within the tolerance is solver noise at a fixed point
      trace.success = true;
      if ((e_new - energy) / energy >= opts.tol_energy) trace.message = "stopped: outer iteration raised the energy";
      return trace;
    }
    const double decrease = (energy - e_new) / energy;
    energy = e_new;
    trace.final_map = map;
    trace.rotations = params.rotations;
    if (decrease < opts.tol_energy) {
      trace.success = true;
      return trace;
    }
    params.rotations = reset_rotations(*map, params.rotations);
  }
  trace.success = true;
  trace.message = "energy loop reached max_outer";
  return trace;
}

}  // namespace detail

/// Minimizes a single shared slack t over the bounded-distortion cones plus the
/// sliding boundary constraints, resetting the rotations to the closest
/// rotations of the current similarity parts until t < 0.
inline SolveTrace feasibility_phase(const std::shared_ptr<const SimplicialMesh>& mesh, const Polytope2& polygon,
                                    const BoundaryAssignment& A, const BDParams& params,
                                    const ConeOptOptions& opts = {}) {
  const Feasibility feas = assignment_feasibility(*mesh, polygon, A);
  if (!feas.feasible) throw PreconditionError("assignment is not topologically feasible: " + feas.reason);
  return detail::run_feasibility(mesh, polygon, VertexParameterization::sliding(*mesh, A), params, opts);
}

/// Dirichlet-energy minimization under the cones and the sliding boundary,
/// alternating solves with rotation resets. The rotations in `params` must make
/// `start` strictly feasible.
inline SolveTrace energy_phase(const std::shared_ptr<const SimplicialMesh>& mesh, const Polytope2& polygon,
                               const BoundaryAssignment& A, const BDParams& params, const SimplicialMap& start,
                               const ConeOptOptions& opts = {}) {
  const Feasibility feas = assignment_feasibility(*mesh, polygon, A);
  if (!feas.feasible) throw PreconditionError("assignment is not topologically feasible: " + feas.reason);
  return detail::run_energy(mesh, VertexParameterization::sliding(*mesh, A), params, start, opts);
}

/// Boundary positions spaced uniformly (by arc length) along each polygon
/// edge over the boundary edges assigned to it. Entry i is the image of loop vertex i.
inline std::vector<Eigen::Vector2d> uniform_boundary_positions(const SimplicialMesh& mesh, const Polytope2& polygon,
                                                               const BoundaryAssignment& A) {
  const Feasibility feas = assignment_feasibility(mesh, polygon, A);
  if (!feas.feasible) throw PreconditionError("assignment is not topologically feasible: " + feas.reason);
  const int L = A.num_boundary_edges();
  std::vector<Eigen::Vector2d> out(L);
  for (int i = 0; i < L; ++i) {
    const int pe = A.polyedge(i);
    if (A.polyedge((i + L - 1) % L) == pe) continue;
    int len = 0;
    while (A.polyedge((i + len) % L) == pe && len < L) ++len;
    for (int k = 0; k < len; ++k) {
      out[(i + k) % L] = polygon.edge_start(pe) + (static_cast<double>(k) / len) * polygon.edge_vector(pe);
    }
  }
  return out;
}

/// True iff the placement walks once around the polygon boundary, strictly
/// forward and without leaving it.
inline bool boundary_placement_bijective(const Polytope2& polygon, const std::vector<Eigen::Vector2d>& positions,
                                         double eps) {
  const int L = static_cast<int>(positions.size());
  if (L < 3) return false;
  const double per = polygon.perimeter();
  double total = 0.0;
  for (int i = 0; i < L; ++i) {
    const Eigen::Vector2d& a = positions[i];
    const Eigen::Vector2d& b = positions[(i + 1) % L];
    if (polygon.boundary_distance(a) > eps) return false;
    double step = polygon.perimeter_parameter(b) - polygon.perimeter_parameter(a);
    if (step < 0) step += per;
    if (step > per - eps) step -= per;
    if (step <= eps) return false;
    // the segment must run along the boundary, not across the polygon
    if (std::abs(step - (b - a).norm()) > eps) return false;
    total += step;
  }
  return std::abs(total - per) <= eps * L;
}

struct FixedBoundaryResult {
  SolveTrace feasibility;
  SolveTrace energy;
};

/// Same two phases with every boundary vertex pinned at `boundary_positions`
/// (entry i is the image of loop vertex i).
inline FixedBoundaryResult fixed_boundary_variant(const std::shared_ptr<const SimplicialMesh>& mesh,
                                                  const Polytope2& polygon,
                                                  const std::vector<Eigen::Vector2d>& boundary_positions,
                                                  const ConeOptOptions& opts = {}) {
  const double eps = opts.eps_margin_rel * 10.0 * polygon.diameter();
  if (!boundary_placement_bijective(polygon, boundary_positions, std::max(eps, 1e-12))) {
    throw InputError("boundary placement is not a bijection onto the polygon boundary");
  }
  const auto param = VertexParameterization::fixed(*mesh, boundary_positions);
  const BDParams params = BDParams::make(opts.K, mesh->num_faces(), opts.eps_margin_rel * polygon.diameter());
  FixedBoundaryResult out;
  out.feasibility = detail::run_feasibility(mesh, polygon, param, params, opts);
  if (!out.feasibility.success) return out;
  BDParams p2 = params;
  p2.rotations = out.feasibility.rotations;
  out.energy = detail::run_energy(mesh, param, p2, *out.feasibility.final_map, opts);
  return out;
}

}  // namespace bijmap
