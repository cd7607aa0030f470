#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bijmap/chain.hpp"
#include "bijmap/error.hpp"

namespace bijmap {

/// Boundary faces of a mesh. faces_by_dim[d-1] holds the boundary facets as
/// oriented vertex tuples carrying the induced orientation; lower dimensions
/// hold canonical keys. For d = 2 the boundary edges are also chained into
/// loops, each loop listing vertices in induced (counterclockwise) order and
/// starting at its smallest vertex index; loops are ordered by that index.
struct BoundaryComplex {
  std::vector<std::vector<std::vector<int>>> faces_by_dim;
  std::vector<std::vector<int>> loops;
};

/// A compact, connected, consistently oriented d-manifold simplicial complex
/// with nonempty boundary, embedded in R^n. Immutable after construction; the
/// constructor validates every invariant and throws StructuralError otherwise.
class SimplicialMesh {
 public:
  SimplicialMesh(int dim, Eigen::MatrixXd vertices, std::vector<std::vector<int>> top_faces)
      : dim_(dim), vertices_(std::move(vertices)), top_faces_(std::move(top_faces)) {
    validate();
    build_boundary();
  }

  int dim() const { return dim_; }
  int ambient_dim() const { return static_cast<int>(vertices_.cols()); }
  int num_vertices() const { return static_cast<int>(vertices_.rows()); }
  int num_faces() const { return static_cast<int>(top_faces_.size()); }

  /// Row-per-vertex coordinates.
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  Eigen::VectorXd vertex(int i) const { return vertices_.row(i).transpose(); }
  const std::vector<std::vector<int>>& top_faces() const { return top_faces_; }
  const std::vector<int>& face(int j) const { return top_faces_[j]; }

  const BoundaryComplex& boundary() const { return boundary_; }

  /// Number of top faces incident to a (d-1)-face, 0 if it is not a facet.
  int facet_valence(const FaceKey& key) const {
    auto it = facet_faces_.find(key);
    return it == facet_faces_.end() ? 0 : static_cast<int>(it->second.size());
  }

  /// Top faces incident to a facet, as (face index, induced sign) pairs.
  const std::vector<std::pair<int, int>>& facet_incidence(const FaceKey& key) const {
    static const std::vector<std::pair<int, int>> none;
    auto it = facet_faces_.find(key);
    return it == facet_faces_.end() ? none : it->second;
  }

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }

  /// All facets (interior and boundary) as canonical keys.
  std::vector<FaceKey> facets() const {
    std::vector<FaceKey> out;
    out.reserve(facet_faces_.size());
    for (const auto& [key, inc] : facet_faces_) out.push_back(key);
    return out;
  }

  /// True iff the canonical key names a face of the complex (any dimension).
  bool has_face(const FaceKey& key) const {
    if (key.empty() || static_cast<int>(key.size()) > dim_ + 1) return false;
    if (key.size() == 1) return key[0] >= 0 && key[0] < num_vertices();
    if (static_cast<int>(key.size()) == dim_ + 1) return top_keys_.count(key) > 0;
    if (static_cast<int>(key.size()) == dim_) return facet_faces_.count(key) > 0;
    // lower faces: contained in some top face through its first vertex
    for (int j : vertex_faces_[key[0]]) {
      const auto& f = top_faces_[j];
      if (std::all_of(key.begin(), key.end(),
                      [&](int v) { return std::find(f.begin(), f.end(), v) != f.end(); })) {
        return true;
      }
    }
    return false;
  }

  /// Top faces incident to a vertex.
  const std::vector<int>& vertex_faces(int v) const { return vertex_faces_[v]; }

 private:
  void validate() {
    if (dim_ < 1) throw StructuralError("mesh dimension must be at least 1");
    if (vertices_.cols() < dim_) throw StructuralError("ambient dimension smaller than mesh dimension");
    if (top_faces_.empty()) throw StructuralError("mesh has no faces");
    const int nv = num_vertices();
    vertex_faces_.assign(nv, {});
    for (int j = 0; j < num_faces(); ++j) {
      const auto& f = top_faces_[j];
      if (static_cast<int>(f.size()) != dim_ + 1) {
        throw StructuralError("face " + std::to_string(j) + " does not have d+1 vertices");
      }
      for (int v : f) {
        if (v < 0 || v >= nv) {
          throw StructuralError("face " + std::to_string(j) + " references vertex " +
                                std::to_string(v) + " out of range");
        }
      }
      auto [key, sign] = canonicalize(f);
      if (!top_keys_.insert(key).second) {
        throw StructuralError("face " + std::to_string(j) + " is duplicated");
      }
      for (int v : f) vertex_faces_[v].push_back(j);
      // facets with induced orientation sign relative to canonical order
      const Chain bd = bijmap::boundary(Chain::oriented_face(f));
      for (const auto& [fkey, coef] : bd.terms()) {
        facet_faces_[fkey].emplace_back(j, static_cast<int>(coef));
      }
    }
    for (int v = 0; v < nv; ++v) {
      if (vertex_faces_[v].empty()) {
        throw StructuralError("vertex " + std::to_string(v) + " is not referenced by any face");
      }
    }
    bool has_boundary = false;
    for (const auto& [key, inc] : facet_faces_) {
      if (inc.size() > 2) throw StructuralError("non-manifold facet shared by " + std::to_string(inc.size()) + " faces");
      if (inc.size() == 1) has_boundary = true;
      if (inc.size() == 2 && inc[0].second == inc[1].second) {
        throw StructuralError("faces " + std::to_string(inc[0].first) + " and " +
                              std::to_string(inc[1].first) + " are inconsistently oriented");
      }
    }
    if (!has_boundary) throw StructuralError("mesh has empty boundary");
    // connectivity of the face adjacency graph
    std::vector<std::vector<int>> adj(num_faces());
    for (const auto& [key, inc] : facet_faces_) {
      if (inc.size() == 2) {
        adj[inc[0].first].push_back(inc[1].first);
        adj[inc[1].first].push_back(inc[0].first);
      }
    }
    std::vector<char> seen(num_faces(), 0);
    std::queue<int> queue;
    queue.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
      int j = queue.front();
      queue.pop();
      for (int k : adj[j]) {
        if (!seen[k]) {
          seen[k] = 1;
          ++reached;
          queue.push(k);
        }
      }
    }
    if (reached != num_faces()) throw StructuralError("mesh is not connected");
    // vertex links must be connected through shared facets (no pinched vertices)
    if (dim_ >= 2) {
      for (int v = 0; v < nv; ++v) {
        const auto& faces = vertex_faces_[v];
        std::set<int> local(faces.begin(), faces.end());
        std::set<int> visited{faces.front()};
        std::vector<int> stack{faces.front()};
        while (!stack.empty()) {
          int j = stack.back();
          stack.pop_back();
          for (int k : adj[j]) {
            if (local.count(k) && visited.insert(k).second) stack.push_back(k);
          }
        }
        if (visited.size() != local.size()) {
          throw StructuralError("vertex " + std::to_string(v) + " is non-manifold (pinched)");
        }
      }
    }
  }

  void build_boundary() {
    boundary_.faces_by_dim.assign(dim_, {});
    boundary_vertex_.assign(num_vertices(), 0);
    std::set<FaceKey> lower;
    for (const auto& [key, inc] : facet_faces_) {
      if (inc.size() != 1) continue;
      std::vector<int> oriented = key;
      if (inc[0].second < 0) {
        if (oriented.size() >= 2) {
          std::swap(oriented[0], oriented[1]);
        }
      }
      boundary_.faces_by_dim[dim_ - 1].push_back(oriented);
      for (int v : key) boundary_vertex_[v] = 1;
      // enumerate every proper sub-face of dimension < d-1
      const int m = static_cast<int>(key.size());
      for (int mask = 1; mask < (1 << m) - 1; ++mask) {
        FaceKey sub;
        for (int i = 0; i < m; ++i) {
          if (mask & (1 << i)) sub.push_back(key[i]);
        }
        lower.insert(sub);
      }
    }
    for (const auto& sub : lower) {
      boundary_.faces_by_dim[sub.size() - 1].push_back(sub);
    }
    if (dim_ != 2) return;
    std::map<int, int> next;
    for (const auto& e : boundary_.faces_by_dim[1]) {
      if (!next.emplace(e[0], e[1]).second) {
        throw StructuralError("boundary vertex " + std::to_string(e[0]) + " has two outgoing boundary edges");
      }
    }
    std::set<int> remaining;
    for (const auto& [a, b] : next) remaining.insert(a);
    while (!remaining.empty()) {
      int start = *remaining.begin();
      std::vector<int> loop;
      int v = start;
      do {
        loop.push_back(v);
        remaining.erase(v);
        auto it = next.find(v);
        if (it == next.end()) throw StructuralError("boundary is not closed");
        v = it->second;
      } while (v != start && loop.size() <= next.size());
      if (v != start) throw StructuralError("boundary is not closed");
      boundary_.loops.push_back(std::move(loop));
    }
  }

  int dim_;
  Eigen::MatrixXd vertices_;
  std::vector<std::vector<int>> top_faces_;
  std::set<FaceKey> top_keys_;
  std::map<FaceKey, std::vector<std::pair<int, int>>> facet_faces_;
  std::vector<std::vector<int>> vertex_faces_;
  std::vector<char> boundary_vertex_;
  BoundaryComplex boundary_;
};

/// Validated boundary operator: every face of `c` must belong to the mesh.
inline Chain boundary_operator(const SimplicialMesh& mesh, const Chain& c) {
  if (c.dim() < 1) throw StructuralError("boundary operator needs a chain of dimension >= 1");
  for (const auto& [key, coef] : c.terms()) {
    if (!mesh.has_face(key)) throw StructuralError("chain references a face that is not in the mesh");
  }
  return boundary(c);
}

/// The (d-1)-cycle of the mesh boundary: the sum of the boundaries of all top
/// faces, in which interior facets cancel.
inline Chain boundary_cycle(const SimplicialMesh& mesh) {
  Chain c(mesh.dim() - 1);
  for (const auto& face : mesh.top_faces()) c += boundary(Chain::oriented_face(face));
  return c;
}

/// Unit chain of top face j in its stored orientation.
inline Chain face_chain(const SimplicialMesh& mesh, int j) { return Chain::oriented_face(mesh.face(j)); }

/// Boundary cycle of a single top face (head - tail when d = 1).
inline Chain face_boundary_chain(const SimplicialMesh& mesh, int j) {
  return boundary(Chain::oriented_face(mesh.face(j)));
}

}  // namespace bijmap
