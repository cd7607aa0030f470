#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bijmap/certify.hpp"
#include "bijmap/cone_opt.hpp"
#include "bijmap/error.hpp"
#include "bijmap/io.hpp"
#include "bijmap/polygon.hpp"

namespace bijmap {

enum class Mode { feasibility, free, fixed_uniform };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::feasibility: return "feasibility";
    case Mode::free: return "free";
    case Mode::fixed_uniform: return "fixed-uniform";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "feasibility") return Mode::feasibility;
  if (s == "free") return Mode::free;
  if (s == "fixed-uniform" || s == "fixed") return Mode::fixed_uniform;
  throw ParameterError("unknown mode '" + s + "' (expected feasibility, free or fixed-uniform)");
}

/// A parsed problem file. Grammar (one statement per line, '#' starts a comment):
///
///     mesh <path>                 OFF or OBJ, relative to the problem file
///     vertex <x> <y>              polygon vertex, counterclockwise, repeated
///     assign uniform [<vertex>]   equal runs per polygon edge, starting at a boundary vertex
///     assign <e> <e> ...          polygon edge per boundary edge, may span several lines
///     mode feasibility|free|fixed-uniform
///     K <real>                    condition-number bound, > 1
///     seed <int>
///     eps_con <real>              constraint tolerance relative to the polygon diameter
///     max_outer <int>
///     tol_energy <real>
///
/// Boundary edge i runs from loop vertex i to i+1 (see SimplicialMesh); the
/// loop starts at the smallest boundary vertex index. Explicit assignments
/// refer to the polygon edges as written; collinear runs are merged on load
/// and the assignment is remapped.
struct ProblemFile {
  std::filesystem::path mesh_path;
  std::vector<Eigen::Vector2d> polygon_input;
  std::vector<int> assignment_input;
  bool uniform = false;
  int uniform_start_vertex = -1;
  Mode mode = Mode::free;
  double K = 15.0;
  std::uint64_t seed = 1;
  double eps_con_rel = 1e-8;
  int max_outer = 10;
  double tol_energy = 1e-6;
  int mesh_line = 0, assign_line = 0, polygon_line = 0;
};

/// A problem with every piece validated.
struct Problem {
  ProblemFile file;
  std::shared_ptr<const SimplicialMesh> mesh;
  std::vector<std::string> notes;
  Polytope2 polygon;
  BoundaryAssignment assignment;
  ConeOptOptions options;
};

inline ProblemFile parse_problem_text(const std::string& text, const std::filesystem::path& base = {}) {
  ProblemFile pf;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_mesh = false;
  auto number = [&](std::istringstream& ls, const char* what) {
    double v;
    if (!(ls >> v)) throw LoadError(std::string("expected a number for ") + what, lineno);
    return v;
  };
  auto integer = [&](std::istringstream& ls, const char* what) {
    long long v;
    if (!(ls >> v)) throw LoadError(std::string("expected an integer for ") + what, lineno);
    return v;
  };
  auto no_trailing = [&](std::istringstream& ls) {
    std::string rest;
    if (ls >> rest) throw LoadError("unexpected trailing token '" + rest + "'", lineno);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(detail::strip_comment(line));
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "mesh") {
      std::string p;
      if (!(ls >> p)) throw LoadError("mesh needs a path", lineno);
      no_trailing(ls);
      pf.mesh_path = base.empty() ? std::filesystem::path(p) : base / p;
      pf.mesh_line = lineno;
      have_mesh = true;
    } else if (key == "vertex") {
      const double x = number(ls, "vertex x"), y = number(ls, "vertex y");
      no_trailing(ls);
      if (pf.polygon_line == 0) pf.polygon_line = lineno;
      pf.polygon_input.emplace_back(x, y);
    } else if (key == "assign") {
      if (pf.assign_line == 0) pf.assign_line = lineno;
      std::string tok;
      std::vector<std::string> toks;
      while (ls >> tok) toks.push_back(tok);
      if (toks.empty()) throw LoadError("assign needs 'uniform' or edge indices", lineno);
      if (toks[0] == "uniform") {
        if (!pf.assignment_input.empty()) throw LoadError("cannot mix uniform and explicit assignments", lineno);
        if (toks.size() > 2) throw LoadError("assign uniform takes at most one start vertex", lineno);
        pf.uniform = true;
        if (toks.size() == 2) {
          try {
            pf.uniform_start_vertex = std::stoi(toks[1]);
          } catch (const std::exception&) {
            throw LoadError("bad start vertex '" + toks[1] + "'", lineno);
          }
        }
      } else {
        if (pf.uniform) throw LoadError("cannot mix uniform and explicit assignments", lineno);
        for (const auto& t : toks) {
          std::size_t used = 0;
          int v = 0;
          try {
            v = std::stoi(t, &used);
          } catch (const std::exception&) {
            used = 0;
          }
          if (used != t.size() || v < 0) throw LoadError("bad polygon edge index '" + t + "'", lineno);
          pf.assignment_input.push_back(v);
        }
      }
    } else if (key == "mode") {
      std::string m;
      if (!(ls >> m)) throw LoadError("mode needs a value", lineno);
      no_trailing(ls);
      try {
        pf.mode = parse_mode(m);
      } catch (const ParameterError& e) {
        throw LoadError(e.what(), lineno);
      }
    } else if (key == "K") {
      pf.K = number(ls, "K");
      no_trailing(ls);
      if (!(pf.K > 1.0)) throw LoadError("K must be > 1", lineno);
    } else if (key == "seed") {
      const long long s = integer(ls, "seed");
      no_trailing(ls);
      if (s < 0) throw LoadError("seed must be nonnegative", lineno);
      pf.seed = static_cast<std::uint64_t>(s);
    } else if (key == "eps_con") {
      pf.eps_con_rel = number(ls, "eps_con");
      no_trailing(ls);
      if (!(pf.eps_con_rel > 0)) throw LoadError("eps_con must be positive", lineno);
    } else if (key == "max_outer") {
      pf.max_outer = static_cast<int>(integer(ls, "max_outer"));
      no_trailing(ls);
      if (pf.max_outer < 1) throw LoadError("max_outer must be at least 1", lineno);
    } else if (key == "tol_energy") {
      pf.tol_energy = number(ls, "tol_energy");
      no_trailing(ls);
      if (!(pf.tol_energy > 0)) throw LoadError("tol_energy must be positive", lineno);
    } else {
      throw LoadError("unknown key '" + key + "'", lineno);
    }
  }
  if (!have_mesh) throw LoadError("problem has no mesh line", lineno);
  if (pf.polygon_input.size() < 3) throw LoadError("polygon needs at least 3 vertex lines", pf.polygon_line ? pf.polygon_line : lineno);
  if (!pf.uniform && pf.assignment_input.empty()) throw LoadError("problem has no assign line", lineno);
  return pf;
}

/// Loads the mesh, merges the polygon, and builds the assignment.
inline Problem resolve_problem(const ProblemFile& pf) {
  LoadedMesh lm;
  try {
    lm = load_mesh(pf.mesh_path.string());
  } catch (const LoadError& e) {
    throw LoadError(std::string("mesh: ") + e.what(), pf.mesh_line);
  }
  std::vector<int> edge_map;
  std::optional<Polytope2> poly;
  try {
    poly.emplace(Polytope2::merged(pf.polygon_input, &edge_map));
  } catch (const ParameterError& e) {
    throw LoadError(std::string("polygon: ") + e.what(), pf.polygon_line);
  }
  std::vector<std::string> notes = lm.notes;
  if (poly->size() != static_cast<int>(pf.polygon_input.size())) {
    notes.push_back("merged collinear polygon edges: " + std::to_string(pf.polygon_input.size()) + " -> " +
                    std::to_string(poly->size()));
  }
  std::vector<int> a;
  try {
    const auto& loop = disk_boundary_loop(*lm.mesh);
    const int L = static_cast<int>(loop.size());
    if (pf.uniform) {
      int start = 0;
      if (pf.uniform_start_vertex >= 0) {
        start = -1;
        for (int i = 0; i < L; ++i) {
          if (loop[i] == pf.uniform_start_vertex) start = i;
        }
        if (start < 0) throw InputError("start vertex " + std::to_string(pf.uniform_start_vertex) + " is not on the boundary");
      }
      a = uniform_assignment(L, poly->size(), start);
    } else {
      if (static_cast<int>(pf.assignment_input.size()) != L) {
        throw InputError("assignment has " + std::to_string(pf.assignment_input.size()) +
                         " entries but the boundary has " + std::to_string(L) + " edges");
      }
      for (int e : pf.assignment_input) {
        if (e >= static_cast<int>(edge_map.size())) {
          throw InputError("polygon edge " + std::to_string(e) + " out of range");
        }
        a.push_back(edge_map[e]);
      }
    }
  } catch (const Error& e) {
    throw LoadError(std::string("assignment: ") + e.what(), pf.assign_line);
  }
  ConeOptOptions opts;
  opts.K = pf.K;
  opts.max_outer = pf.max_outer;
  opts.tol_energy = pf.tol_energy;
  BoundaryAssignment assignment = [&]() {
    try {
      return BoundaryAssignment(*lm.mesh, *poly, a);
    } catch (const Error& e) {
      throw LoadError(std::string("assignment: ") + e.what(), pf.assign_line);
    }
  }();
  return Problem{pf, lm.mesh, std::move(notes), *poly, std::move(assignment), opts};
}

inline Problem load_problem(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  return resolve_problem(parse_problem_text(text, path.parent_path()));
}

}  // namespace bijmap
