#pragma once

// Meshes, polygons and engineered maps used by the tests, the acceptance
// suite and the sample generator.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "bijmap/certify.hpp"
#include "bijmap/mesh.hpp"
#include "bijmap/polygon.hpp"
#include "bijmap/simplicial_map.hpp"

namespace bijmap::fixtures {

using MeshPtr = std::shared_ptr<const SimplicialMesh>;

inline MeshPtr make_mesh(const std::vector<Eigen::Vector2d>& pts, std::vector<std::vector<int>> faces) {
  Eigen::MatrixXd v(pts.size(), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) v.row(i) = pts[i].transpose();
  return std::make_shared<const SimplicialMesh>(2, std::move(v), std::move(faces));
}

inline Polytope2 unit_square() { return Polytope2({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

/// L-shaped polygon: [0, a] x [0, 1] union [0, 1] x [0, b], counterclockwise from the origin.
inline Polytope2 l_polygon(double a = 2.0, double b = 2.0) {
  return Polytope2({{0, 0}, {a, 0}, {a, 1}, {1, 1}, {1, b}, {0, b}});
}

/// Triangulated n x n grid of the unit square; vertex (i, j) has index j * (n + 1) + i.
inline MeshPtr grid_square(int n) {
  std::vector<Eigen::Vector2d> pts;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) pts.emplace_back(double(i) / n, double(j) / n);
  }
  std::vector<std::vector<int>> faces;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return make_mesh(pts, std::move(faces));
}

/// Unit disk meshed by an n x n grid pushed through the elliptical
/// square-to-disk map. Diagonals run away from the center so the cells at the
/// four corners stay well shaped. Same vertex numbering as grid_square.
inline MeshPtr grid_disk(int n) {
  std::vector<Eigen::Vector2d> pts;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double x = -1.0 + 2.0 * i / n, y = -1.0 + 2.0 * j / n;
      pts.emplace_back(x * std::sqrt(1.0 - y * y / 2.0), y * std::sqrt(1.0 - x * x / 2.0));
    }
  }
  std::vector<std::vector<int>> faces;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double cx = i + 0.5 - n / 2.0, cy = j + 0.5 - n / 2.0;
      if (cx * cy > 0) {
        faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      } else {
        faces.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        faces.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  }
  return make_mesh(pts, std::move(faces));
}

/// L-shaped region [0,2]x[0,1] union [0,1]x[1,2] meshed with cells of size 1/n.
/// Vertex 0 is the origin, so the boundary loop starts there and runs along
/// the bottom edge first.
inline MeshPtr l_mesh(int n) {
  std::map<std::pair<int, int>, int> index;
  std::vector<Eigen::Vector2d> pts;
  auto inside = [n](int i, int j) { return (j <= n && i <= 2 * n) || (i <= n && j <= 2 * n); };
  for (int j = 0; j <= 2 * n; ++j) {
    for (int i = 0; i <= 2 * n; ++i) {
      if (!inside(i, j)) continue;
      index[{i, j}] = static_cast<int>(pts.size());
      pts.emplace_back(double(i) / n, double(j) / n);
    }
  }
  std::vector<std::vector<int>> faces;
  for (int j = 0; j < 2 * n; ++j) {
    for (int i = 0; i < 2 * n; ++i) {
      const bool cell = (j < n) || (i < n);
      if (!cell) continue;
      const int a = index[{i, j}], b = index[{i + 1, j}], c = index[{i + 1, j + 1}], d = index[{i, j + 1}];
      if ((i + j) % 2 == 0) {
        faces.push_back({a, b, c});
        faces.push_back({a, c, d});
      } else {
        faces.push_back({a, b, d});
        faces.push_back({b, c, d});
      }
    }
  }
  return make_mesh(pts, std::move(faces));
}

/// Assignment of l_mesh(n)'s boundary to the six sides of an L polygon.
inline std::vector<int> l_assignment(int n) {
  std::vector<int> a;
  const int runs[6] = {2 * n, n, n, n, n, 2 * n};
  for (int e = 0; e < 6; ++e) a.insert(a.end(), runs[e], e);
  return a;
}

/// Position in the boundary loop of mesh vertex v.
inline int loop_position(const SimplicialMesh& mesh, int v) {
  const auto& loop = disk_boundary_loop(mesh);
  for (std::size_t i = 0; i < loop.size(); ++i) {
    if (loop[i] == v) return static_cast<int>(i);
  }
  throw InputError("vertex " + std::to_string(v) + " is not on the boundary");
}

/// Quarter-per-side assignment of grid_disk(n) (or grid_square(n)) to a
/// square, aligned so that the grid corners land on the polygon corners.
inline std::vector<int> grid_square_assignment(const SimplicialMesh& mesh, int n) {
  const int L = 4 * n;
  return uniform_assignment(L, 4, loop_position(mesh, 0));
}

/// Problem instance: mesh, target polygon and boundary assignment.
struct Instance {
  MeshPtr mesh;
  Polytope2 polygon;
  std::vector<int> assignment;
};

inline Instance disk_to_square(int n = 8) {
  auto mesh = grid_disk(n);
  return {mesh, unit_square(), grid_square_assignment(*mesh, n)};
}

/// L-shaped mesh onto a longer-armed L: the sides keep their correspondence,
/// the proportions do not.
inline Instance l_to_l(int n = 4) { return {l_mesh(n), l_polygon(3.0, 2.5), l_assignment(n)}; }

/// Discrete harmonic (uniform weights) map with the boundary loop pinned at
/// `positions`; bijective whenever the positions trace a convex polygon.
inline Eigen::MatrixXd tutte_images(const SimplicialMesh& mesh, const std::vector<Eigen::Vector2d>& positions) {
  const auto& loop = disk_boundary_loop(mesh);
  const int nv = mesh.num_vertices();
  std::vector<std::vector<int>> nbr(nv);
  for (const auto& f : mesh.top_faces()) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a != b) nbr[f[a]].push_back(f[b]);
      }
    }
  }
  for (auto& list : nbr) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  std::vector<int> fixed_at(nv, -1);
  for (std::size_t i = 0; i < loop.size(); ++i) fixed_at[loop[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv, 2);
  for (int v = 0; v < nv; ++v) {
    if (fixed_at[v] >= 0) {
      trip.emplace_back(v, v, 1.0);
      rhs.row(v) = positions[fixed_at[v]].transpose();
      continue;
    }
    trip.emplace_back(v, v, static_cast<double>(nbr[v].size()));
    for (int w : nbr[v]) trip.emplace_back(v, w, -1.0);
  }
  Eigen::SparseMatrix<double> L(nv, nv);
  L.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(L);
  if (lu.info() != Eigen::Success) throw InputError("harmonic system is singular");
  return lu.solve(rhs);
}

/// Square with a center vertex whose image is pushed outside the square: one
/// of the four faces flips.
inline SimplicialMap fold_fan() {
  auto mesh = make_mesh({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {0, 0}}, {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}});
  Eigen::MatrixXd img(5, 2);
  img << -1, -1, 1, -1, 1, 1, -1, 1, 1.6, 0;
  return SimplicialMap(mesh, img);
}

/// Fan of `spokes` triangles around a center vertex whose boundary images go
/// twice around the center: every face is orientation preserving, the center
/// has one pre-image and boundary degree 2.
inline SimplicialMap wrap2_fan(int spokes = 7) {
  const double pi = std::acos(-1.0);
  std::vector<Eigen::Vector2d> pts{{0, 0}};
  std::vector<std::vector<int>> faces;
  Eigen::MatrixXd img(spokes + 1, 2);
  img.row(0) << 0, 0;
  for (int k = 0; k < spokes; ++k) {
    const double a = 2 * pi * k / spokes;
    pts.emplace_back(std::cos(a), std::sin(a));
    // alternate radii keep the doubled images from coinciding
    const double r = (k % 2 == 0) ? 1.0 : 1.3;
    img.row(k + 1) << r * std::cos(2 * a), r * std::sin(2 * a);
    faces.push_back({0, k + 1, (k + 1) % spokes + 1});
  }
  return SimplicialMap(make_mesh(pts, std::move(faces)), img);
}

/// Engineered L-shape map whose boundary runs into the interior of the
/// target: the boundary edges on the line y = 1 overshoot the reflex corner
/// (1, 1) to (0.5, 1) and come back, so a slit of the image is traced twice.
/// Interior-injective and onto, every boundary edge on its assigned line, yet
/// the boundary map is not injective.
struct SlitMap {
  SimplicialMap map;
  Polytope2 polygon;
  std::vector<int> assignment;
};

inline SlitMap slit_l_map() {
  // lower block: 5 x 3 grid of step 0.5 over [0,2] x [0,1]
  std::vector<Eigen::Vector2d> src, img;
  auto add = [&](Eigen::Vector2d s, Eigen::Vector2d t) {
    src.push_back(s);
    img.push_back(t);
    return static_cast<int>(src.size()) - 1;
  };
  int low[5][3];
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 5; ++i) {
      const Eigen::Vector2d p(0.5 * i, 0.5 * j);
      Eigen::Vector2d s = p;
      if (i == 2 && j == 2) s = {1.0, 0.9};  // lower copy of the reflex corner
      low[i][j] = add(s, p);
    }
  }
  // upper block over [0,1] x [1,2]; its bottom row shares (0,1) and (0.5,1)
  int up[3][3];
  up[0][0] = low[0][2];
  up[1][0] = low[1][2];
  up[2][0] = add({1.0, 1.1}, {1.0, 1.0});  // upper copy of the reflex corner
  for (int j = 1; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector2d p(0.5 * i, 1.0 + 0.5 * j);
      up[i][j] = add(p, p);
    }
  }
  std::vector<std::vector<int>> faces;
  auto quad = [&](int a, int b, int c, int d) {
    faces.push_back({a, b, c});
    faces.push_back({a, c, d});
  };
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 4; ++i) quad(low[i][j], low[i + 1][j], low[i + 1][j + 1], low[i][j + 1]);
  }
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) quad(up[i][j], up[i + 1][j], up[i + 1][j + 1], up[i][j + 1]);
  }
  auto mesh = make_mesh(src, std::move(faces));
  Eigen::MatrixXd u(img.size(), 2);
  for (std::size_t k = 0; k < img.size(); ++k) u.row(k) = img[k].transpose();
  SimplicialMap map(mesh, u);
  // the loop starts at the origin: 4 bottom edges, 2 right, 4 on y = 1 (two of
  // them out and back along the slit), 2 up x = 1, 2 top, 4 left
  std::vector<int> a;
  const int runs[6] = {4, 2, 4, 2, 2, 4};
  for (int e = 0; e < 6; ++e) a.insert(a.end(), runs[e], e);
  return {std::move(map), l_polygon(2.0, 2.0), std::move(a)};
}

}  // namespace bijmap::fixtures
