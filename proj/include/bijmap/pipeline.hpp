#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "bijmap/certify.hpp"
#include "bijmap/cone_opt.hpp"
#include "bijmap/io.hpp"
#include "bijmap/problem.hpp"
#include "bijmap/svg.hpp"

namespace bijmap {

struct RunReport {
  Mode mode = Mode::free;
  std::string stage = "complete";  ///< "complete" or the stage that failed
  bool ok = false;
  std::string message;
  std::vector<std::string> notes;
  std::vector<TraceEntry> feasibility;
  std::vector<TraceEntry> energy;
  double final_energy = std::numeric_limits<double>::quiet_NaN();
  std::vector<Certificate> certificates;
  std::vector<double> gradient_norms;
  double max_condition = std::numeric_limits<double>::quiet_NaN();
  double min_det = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<std::string, double>> timing_ms;
  std::shared_ptr<SimplicialMap> map;  ///< not serialized

  const Certificate* certificate(Theorem t) const {
    for (const auto& c : certificates) {
      if (c.theorem == t) return &c;
    }
    return nullptr;
  }
};

/// necessary, T1, T2 and T3 on one map.
inline std::vector<Certificate> certify_all(const SimplicialMap& map, const Polytope2& polygon,
                                            const BoundaryAssignment& A, const CertifyOptions& opts) {
  return {check_necessary(map, opts), certify_T1(map, polygon, opts), certify_T2(map, polygon, A, opts),
          certify_T3(map, polygon, A, opts)};
}

/// The certificate a solve in the given mode is expected to earn.
inline Theorem target_theorem(Mode m) {
  switch (m) {
    case Mode::feasibility: return Theorem::T2;
    case Mode::free: return Theorem::T2;
    case Mode::fixed_uniform: return Theorem::T1;
  }
  return Theorem::T2;
}

inline void summarize_map(RunReport& r, const SimplicialMap& map) {
  r.gradient_norms = gradient_norms(map);
  r.final_energy = dirichlet_energy(map);
  double cmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < map.mesh().num_faces(); ++j) {
    const Eigen::Matrix2d A = face_affine_map(map, j).linear_part;
    cmax = std::max(cmax, condition_number(A));
    dmin = std::min(dmin, A.determinant());
  }
  r.max_condition = cmax;
  r.min_det = dmin;
}

/// Runs the optimization for `problem.file.mode` and certifies the result.
/// Failures leave `stage` naming the step that failed.
inline RunReport run(const Problem& problem) {
  using clock = std::chrono::steady_clock;
  RunReport r;
  r.mode = problem.file.mode;
  r.notes = problem.notes;
  const auto& mesh = problem.mesh;
  const ConeOptOptions& opts = problem.options;
  CertifyOptions copts;
  copts.eps_con_rel = problem.file.eps_con_rel;
  auto lap = [&](const char* name, clock::time_point t0) {
    r.timing_ms.emplace_back(name, std::chrono::duration<double, std::milli>(clock::now() - t0).count());
  };

  const Feasibility feas = assignment_feasibility(*mesh, problem.polygon, problem.assignment);
  if (!feas.feasible) {
    r.stage = "assignment";
    r.message = "infeasible assignment: " + feas.reason;
    return r;
  }
  const double margin = opts.eps_margin_rel * problem.polygon.diameter();
  std::shared_ptr<SimplicialMap> result;
  try {
    if (r.mode == Mode::fixed_uniform) {
      const auto t0 = clock::now();
      const auto positions = uniform_boundary_positions(*mesh, problem.polygon, problem.assignment);
      const FixedBoundaryResult fb = fixed_boundary_variant(mesh, problem.polygon, positions, opts);
      lap("solve", t0);
      r.feasibility = fb.feasibility.iterations;
      r.energy = fb.energy.iterations;
      if (!fb.feasibility.success) {
        r.stage = "feasibility";
        r.message = fb.feasibility.message;
        result = fb.feasibility.final_map;
      } else {
        result = fb.energy.final_map;
        if (!fb.energy.success) {
          r.stage = "energy";
          r.message = fb.energy.message;
        } else if (!fb.energy.message.empty()) {
          r.notes.push_back(fb.energy.message);
        }
      }
    } else {
      const BDParams params = BDParams::make(opts.K, mesh->num_faces(), margin);
      auto t0 = clock::now();
      const SolveTrace ft = feasibility_phase(mesh, problem.polygon, problem.assignment, params, opts);
      lap("feasibility", t0);
      r.feasibility = ft.iterations;
      result = ft.final_map;
      if (!ft.success) {
        r.stage = "feasibility";
        r.message = ft.message;
      } else if (r.mode == Mode::free) {
        BDParams p2 = params;
        p2.rotations = ft.rotations;
        t0 = clock::now();
        const SolveTrace et = energy_phase(mesh, problem.polygon, problem.assignment, p2, *ft.final_map, opts);
        lap("energy", t0);
        r.energy = et.iterations;
        result = et.final_map;
        if (!et.success) {
          r.stage = "energy";
          r.message = et.message;
        } else if (!et.message.empty()) {
          r.notes.push_back(et.message);
        }
      }
    }
  } catch (const Error& e) {
    r.stage = "solve";
    r.message = e.what();
    return r;
  }
  if (result) {
    const auto t0 = clock::now();
    r.map = result;
    summarize_map(r, *result);
    r.certificates = certify_all(*result, problem.polygon, problem.assignment, copts);
    lap("certify", t0);
  }
  const Certificate* target = r.certificate(target_theorem(r.mode));
  r.ok = r.stage == "complete" && target && target->certified();
  if (r.stage == "complete" && !r.ok) r.message = "requested certificate not granted";
  return r;
}

namespace detail {

inline std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace detail

/// Line-oriented text form of a report: "<key> <fields...>" per line.
inline std::string format_report(const RunReport& r) {
  std::ostringstream os;
  os << "report 1\n";
  os << "mode " << to_string(r.mode) << '\n';
  os << "stage " << r.stage << '\n';
  os << "status " << (r.ok ? "ok" : "failed") << '\n';
  if (!r.message.empty()) os << "message " << detail::one_line(r.message) << '\n';
  for (const auto& n : r.notes) os << "note " << detail::one_line(n) << '\n';
  auto trace = [&](const char* key, const std::vector<TraceEntry>& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      os << key << ' ' << i << ' ' << format_double(t[i].value) << ' ' << format_double(t[i].max_residual) << ' '
         << to_string(t[i].solver_status) << ' ' << t[i].solver_iterations << ' ' << (t[i].accepted ? 1 : 0) << '\n';
    }
  };
  trace("feasibility", r.feasibility);
  trace("energy_iteration", r.energy);
  if (!std::isnan(r.final_energy)) os << "energy " << format_double(r.final_energy) << '\n';
  if (!std::isnan(r.max_condition)) os << "max_condition " << format_double(r.max_condition) << '\n';
  if (!std::isnan(r.min_det)) os << "min_det " << format_double(r.min_det) << '\n';
  for (const auto& c : r.certificates) {
    os << "certificate " << to_string(c.theorem) << ' ' << to_string(c.verdict) << ' ' << format_double(c.tolerance)
       << '\n';
    for (const auto& e : c.evidence) {
      os << "evidence " << to_string(c.theorem) << ' ' << e.kind << ' ' << e.index << ' ' << format_double(e.residual)
         << ' ' << detail::one_line(e.message) << '\n';
    }
  }
  for (std::size_t j = 0; j < r.gradient_norms.size(); ++j) {
    os << "gradient_norm " << j << ' ' << format_double(r.gradient_norms[j]) << '\n';
  }
  for (const auto& [name, ms] : r.timing_ms) os << "timing_ms " << name << ' ' << format_double(ms) << '\n';
  return os.str();
}

/// report.txt always; mapped.obj, map.svg and gradient.svg when a map exists.
inline void write_artifacts(const RunReport& r, const Polytope2& polygon, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "report.txt", format_report(r));
  if (!r.map) return;
  write_text(out_dir / "mapped.obj", map_to_obj(*r.map));
  write_text(out_dir / "map.svg", render_svg(*r.map, polygon, Coloring::none));
  write_text(out_dir / "gradient.svg", render_svg(*r.map, polygon, Coloring::gradient_norm));
}

inline Theorem parse_theorem(const std::string& s) {
  if (s == "necessary") return Theorem::necessary;
  if (s == "T1") return Theorem::T1;
  if (s == "T2") return Theorem::T2;
  if (s == "T3") return Theorem::T3;
  throw ParameterError("unknown theorem '" + s + "'");
}

/// Reads back what format_report writes (the map itself is not part of it).
inline RunReport parse_report(const std::string& text) {
  RunReport r;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto rest_of = [](std::istringstream& ls) {
    std::string rest;
    std::getline(ls, rest);
    if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
    return rest;
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "report") continue;
    if (key == "mode") {
      std::string m;
      ls >> m;
      r.mode = parse_mode(m);
    } else if (key == "stage") {
      ls >> r.stage;
    } else if (key == "status") {
      std::string s;
      ls >> s;
      r.ok = s == "ok";
    } else if (key == "message") {
      r.message = rest_of(ls);
    } else if (key == "note") {
      r.notes.push_back(rest_of(ls));
    } else if (key == "feasibility" || key == "energy_iteration") {
      TraceEntry t;
      std::size_t i;
      std::string status;
      int acc = 0;
      if (!(ls >> i >> t.value >> t.max_residual >> status >> t.solver_iterations >> acc)) {
        throw LoadError("malformed trace line", lineno);
      }
      t.accepted = acc != 0;
      t.solver_status = status == "optimal"        ? SolveStatus::optimal
                        : status == "near_optimal" ? SolveStatus::near_optimal
                        : status == "max_iterations" ? SolveStatus::max_iterations
                                                     : SolveStatus::numerical_error;
      (key == "feasibility" ? r.feasibility : r.energy).push_back(t);
    } else if (key == "energy") {
      ls >> r.final_energy;
    } else if (key == "max_condition") {
      ls >> r.max_condition;
    } else if (key == "min_det") {
      ls >> r.min_det;
    } else if (key == "certificate") {
      std::string th, verdict;
      Certificate c;
      if (!(ls >> th >> verdict >> c.tolerance)) throw LoadError("malformed certificate line", lineno);
      c.theorem = parse_theorem(th);
      c.verdict = verdict == "certified" ? Verdict::certified : Verdict::refuted;
      r.certificates.push_back(c);
    } else if (key == "evidence") {
      std::string th;
      Evidence e;
      if (!(ls >> th >> e.kind >> e.index >> e.residual)) throw LoadError("malformed evidence line", lineno);
      e.message = rest_of(ls);
      const Theorem t = parse_theorem(th);
      for (auto& c : r.certificates) {
        if (c.theorem == t) c.evidence.push_back(e);
      }
    } else if (key == "gradient_norm") {
      std::size_t j;
      double v;
      if (!(ls >> j >> v)) throw LoadError("malformed gradient_norm line", lineno);
      if (r.gradient_norms.size() <= j) r.gradient_norms.resize(j + 1);
      r.gradient_norms[j] = v;
    } else if (key == "timing_ms") {
      std::string name;
      double ms;
      ls >> name >> ms;
      r.timing_ms.emplace_back(name, ms);
    } else {
      throw LoadError("unknown report key '" + key + "'", lineno);
    }
  }
  return r;
}

/// Image coordinates from an OBJ written by map_to_obj; its faces must match `mesh`.
inline SimplicialMap load_mapped_obj(const std::string& path, const std::shared_ptr<const SimplicialMesh>& mesh) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path + "'");
  std::vector<Eigen::Vector2d> pts;
  std::vector<std::vector<int>> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(detail::strip_comment(line));
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y;
      if (!(ls >> x >> y)) throw LoadError("malformed vertex", lineno);
      pts.emplace_back(x, y);
    } else if (tag == "f") {
      std::vector<int> f;
      std::string tok;
      while (ls >> tok) f.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
      faces.push_back(f);
    }
  }
  if (static_cast<int>(pts.size()) != mesh->num_vertices()) {
    throw LoadError("mapped mesh has " + std::to_string(pts.size()) + " vertices, expected " +
                    std::to_string(mesh->num_vertices()));
  }
  if (faces != mesh->top_faces()) throw LoadError("mapped mesh faces do not match the problem mesh");
  Eigen::MatrixXd u(pts.size(), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) u.row(i) = pts[i].transpose();
  return SimplicialMap(mesh, u);
}

}  // namespace bijmap
