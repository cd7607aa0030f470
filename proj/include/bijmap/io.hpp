#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bijmap/error.hpp"
#include "bijmap/mesh.hpp"
#include "bijmap/simplicial_map.hpp"

namespace bijmap {

struct LoadedMesh {
  std::shared_ptr<const SimplicialMesh> mesh;
  std::vector<std::string> notes;  ///< e.g. faces reoriented on load
};

namespace detail {

inline std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

/// Makes the winding of a triangle soup consistent by flood fill over shared
/// edges, then (for planar input) counterclockwise. Rejects non-manifold
/// edges, unreferenced vertices and non-orientable input.
inline LoadedMesh finish_triangles(Eigen::MatrixXd vertices, std::vector<std::vector<int>> faces) {
  LoadedMesh out;
  const int nv = static_cast<int>(vertices.rows());
  const int nf = static_cast<int>(faces.size());
  if (nf == 0) throw LoadError("mesh has no faces");
  std::vector<char> used(nv, 0);
  for (int j = 0; j < nf; ++j) {
    for (int v : faces[j]) {
      if (v < 0 || v >= nv) throw LoadError("face " + std::to_string(j) + " references vertex " + std::to_string(v) + " out of range");
      used[v] = 1;
    }
    if (faces[j][0] == faces[j][1] || faces[j][1] == faces[j][2] || faces[j][0] == faces[j][2]) {
      throw LoadError("face " + std::to_string(j) + " repeats a vertex");
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (!used[v]) throw LoadError("vertex " + std::to_string(v) + " is not referenced by any face");
  }
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (int j = 0; j < nf; ++j) {
    for (int k = 0; k < 3; ++k) {
      const int a = faces[j][k], b = faces[j][(k + 1) % 3];
      edge_faces[{std::min(a, b), std::max(a, b)}].push_back(j);
    }
  }
  for (const auto& [e, list] : edge_faces) {
    if (list.size() > 2) {
      std::string ids;
      for (int j : list) ids += (ids.empty() ? "" : ", ") + std::to_string(j);
      throw LoadError("non-manifold edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) +
                      ") shared by faces " + ids);
    }
  }
  auto has_directed = [&](int j, int a, int b) {
    for (int k = 0; k < 3; ++k) {
      if (faces[j][k] == a && faces[j][(k + 1) % 3] == b) return true;
    }
    return false;
  };
  std::vector<int> flip(nf, -1);  // -1 unvisited, 0 keep, 1 flip
  int flipped = 0;
  for (int seed = 0; seed < nf; ++seed) {
    if (flip[seed] >= 0) continue;
    flip[seed] = 0;
    std::queue<int> queue;
    queue.push(seed);
    while (!queue.empty()) {
      const int j = queue.front();
      queue.pop();
      for (int k = 0; k < 3; ++k) {
        int a = faces[j][k], b = faces[j][(k + 1) % 3];
        if (flip[j]) std::swap(a, b);
        for (int o : edge_faces[{std::min(a, b), std::max(a, b)}]) {
          if (o == j) continue;
          // consistent neighbors traverse the shared edge as b -> a
          const int want = has_directed(o, b, a) ? 0 : 1;
          if (flip[o] < 0) {
            flip[o] = want;
            queue.push(o);
          } else if (flip[o] != want) {
            throw LoadError("mesh is not orientable (conflict at face " + std::to_string(o) + ")");
          }
        }
      }
    }
  }
  for (int j = 0; j < nf; ++j) {
    if (flip[j]) {
      std::swap(faces[j][1], faces[j][2]);
      ++flipped;
    }
  }
  if (flipped > 0) out.notes.push_back("reoriented " + std::to_string(flipped) + " face(s) for consistent winding");
  bool planar = vertices.cols() == 2;
  if (vertices.cols() == 3 && vertices.col(2).cwiseAbs().maxCoeff() == 0.0) planar = true;
  if (planar) {
    Eigen::MatrixXd v2 = vertices.leftCols(2);
    double area = 0.0;
    for (const auto& f : faces) {
      const Eigen::Vector2d e1 = (v2.row(f[1]) - v2.row(f[0])).transpose();
      const Eigen::Vector2d e2 = (v2.row(f[2]) - v2.row(f[0])).transpose();
      area += e1.x() * e2.y() - e1.y() * e2.x();
    }
    if (area < 0) {
      for (auto& f : faces) std::swap(f[1], f[2]);
      out.notes.push_back("flipped all faces to counterclockwise winding");
    }
    vertices = v2;
  }
  try {
    out.mesh = std::make_shared<const SimplicialMesh>(2, std::move(vertices), std::move(faces));
  } catch (const StructuralError& e) {
    throw LoadError(e.what());
  }
  return out;
}

inline LoadedMesh read_off(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next = [&](std::string& content) {
    while (std::getline(in, line)) {
      ++lineno;
      content = strip_comment(line);
      if (!blank(content)) return true;
    }
    return false;
  };
  std::string content;
  if (!next(content)) throw LoadError("empty OFF file", lineno);
  std::istringstream head(content);
  std::string magic;
  head >> magic;
  if (magic != "OFF") throw LoadError("missing OFF header", lineno);
  long nv = -1, nf = -1, ne = 0;
  if (!(head >> nv)) {
    if (!next(content)) throw LoadError("missing OFF counts", lineno);
    std::istringstream counts(content);
    if (!(counts >> nv >> nf)) throw LoadError("malformed OFF counts", lineno);
    counts >> ne;
  } else if (!(head >> nf)) {
    throw LoadError("malformed OFF counts", lineno);
  }
  if (nv < 0 || nf < 0) throw LoadError("negative OFF counts", lineno);
  std::vector<std::vector<double>> coords(nv);
  int cols = 3;
  for (long i = 0; i < nv; ++i) {
    if (!next(content)) throw LoadError("OFF ends before vertex " + std::to_string(i), lineno);
    std::istringstream ls(content);
    double x;
    while (ls >> x) coords[i].push_back(x);
    if (coords[i].size() < 2 || coords[i].size() > 3) {
      throw LoadError("vertex " + std::to_string(i) + " needs 2 or 3 coordinates", lineno);
    }
    if (i == 0) cols = static_cast<int>(coords[i].size());
    if (static_cast<int>(coords[i].size()) != cols) {
      throw LoadError("vertex " + std::to_string(i) + " has inconsistent dimension", lineno);
    }
  }
  Eigen::MatrixXd v(nv, cols);
  for (long i = 0; i < nv; ++i) {
    for (int c = 0; c < cols; ++c) v(i, c) = coords[i][c];
  }
  std::vector<std::vector<int>> faces;
  for (long j = 0; j < nf; ++j) {
    if (!next(content)) throw LoadError("OFF ends before face " + std::to_string(j), lineno);
    std::istringstream ls(content);
    int k = 0;
    ls >> k;
    if (k != 3) throw LoadError("face " + std::to_string(j) + " has " + std::to_string(k) + " vertices; only triangles are supported", lineno);
    std::vector<int> f(3);
    if (!(ls >> f[0] >> f[1] >> f[2])) throw LoadError("malformed face " + std::to_string(j), lineno);
    faces.push_back(f);
  }
  return finish_triangles(std::move(v), std::move(faces));
}

inline LoadedMesh read_obj(std::istream& in) {
  std::string line;
  int lineno = 0;
  std::vector<std::vector<double>> coords;
  std::vector<std::vector<int>> faces;
  int cols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string content = strip_comment(line);
    std::istringstream ls(content);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::vector<double> c;
      double x;
      while (ls >> x) c.push_back(x);
      if (c.size() == 4) c.pop_back();  // homogeneous weight
      if (c.size() < 2 || c.size() > 3) throw LoadError("vertex needs 2 or 3 coordinates", lineno);
      if (cols == 0) cols = static_cast<int>(c.size());
      if (static_cast<int>(c.size()) != cols) throw LoadError("vertex has inconsistent dimension", lineno);
      coords.push_back(std::move(c));
    } else if (tag == "f") {
      std::vector<int> f;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        int idx = 0;
        try {
          idx = std::stoi(head);
        } catch (const std::exception&) {
          throw LoadError("malformed face index '" + tok + "'", lineno);
        }
        if (idx < 0) idx = static_cast<int>(coords.size()) + idx + 1;
        f.push_back(idx - 1);
      }
      if (f.size() != 3) {
        throw LoadError("face " + std::to_string(faces.size()) + " has " + std::to_string(f.size()) +
                            " vertices; only triangles are supported",
                        lineno);
      }
      faces.push_back(std::move(f));
    }
  }
  Eigen::MatrixXd v(coords.size(), std::max(cols, 2));
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (int c = 0; c < cols; ++c) v(i, c) = coords[i][c];
  }
  return finish_triangles(std::move(v), std::move(faces));
}

}  // namespace detail

/// Loads a triangle mesh from OFF or OBJ (chosen by extension).
inline LoadedMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open mesh file '" + path + "'");
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return detail::read_off(in);
  if (ext == ".obj") return detail::read_obj(in);
  throw LoadError("unsupported mesh format '" + ext + "' (expected .off or .obj)");
}

inline LoadedMesh load_mesh_string(const std::string& text, const std::string& format) {
  std::istringstream in(text);
  if (format == "off") return detail::read_off(in);
  if (format == "obj") return detail::read_obj(in);
  throw LoadError("unsupported mesh format '" + format + "'");
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// OBJ with the image coordinates (z = 0) and the mesh faces.
inline std::string map_to_obj(const SimplicialMap& map) {
  std::ostringstream os;
  for (int v = 0; v < map.mesh().num_vertices(); ++v) {
    os << "v " << format_double(map.images()(v, 0)) << ' ' << format_double(map.images()(v, 1)) << " 0\n";
  }
  for (const auto& f : map.mesh().top_faces()) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  return os.str();
}

/// OFF of a planar source mesh (z = 0).
inline std::string mesh_to_off(const SimplicialMesh& mesh) {
  std::ostringstream os;
  os << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    for (int c = 0; c < mesh.ambient_dim(); ++c) os << (c ? " " : "") << format_double(mesh.vertices()(v, c));
    if (mesh.ambient_dim() == 2) os << " 0";
    os << '\n';
  }
  for (const auto& f : mesh.top_faces()) os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace bijmap
