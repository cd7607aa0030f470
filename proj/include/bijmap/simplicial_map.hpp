#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bijmap/error.hpp"
#include "bijmap/mesh.hpp"

namespace bijmap {

/// Source-side geometry of one top face, expressed in a per-face frame.
///
/// For planar meshes (n == d) the frame is the ambient one. Otherwise the frame
/// is orthonormal with its origin at the first corner and its first axis along
/// the first edge (Gram-Schmidt on the remaining edges for d > 2).
struct FaceFrame {
  Eigen::MatrixXd local;    ///< d x (d+1) corner coordinates in the frame
  Eigen::MatrixXd linear;   ///< (d+1) x d: A = U * linear, U = d x (d+1) corner images
  Eigen::VectorXd offset;   ///< (d+1): delta = U * offset
  double volume = 0.0;      ///< unsigned d-volume (area for d = 2)
  double diameter = 0.0;    ///< longest edge length
  bool degenerate = false;  ///< corners not affinely independent; linear/offset unset
};

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Builds the frame of face j. A degenerate source face (corners not affinely
/// independent) yields a frame flagged `degenerate`.
inline FaceFrame make_face_frame(const SimplicialMesh& mesh, int j) {
  const int d = mesh.dim();
  const int n = mesh.ambient_dim();
  const auto& f = mesh.face(j);
  FaceFrame fr;
  Eigen::MatrixXd edges(n, d);
  const Eigen::VectorXd p0 = mesh.vertex(f[0]);
  for (int k = 0; k < d; ++k) edges.col(k) = mesh.vertex(f[k + 1]) - p0;
  double diam = 0.0;
  for (int a = 0; a <= d; ++a) {
    for (int b = a + 1; b <= d; ++b) diam = std::max(diam, (mesh.vertex(f[a]) - mesh.vertex(f[b])).norm());
  }
  fr.diameter = diam;
  fr.local.resize(d, d + 1);
  if (n == d) {
    for (int k = 0; k <= d; ++k) fr.local.col(k) = mesh.vertex(f[k]);
  } else {
    Eigen::MatrixXd basis(n, d);
    for (int k = 0; k < d; ++k) {
      Eigen::VectorXd e = edges.col(k);
      for (int i = 0; i < k; ++i) e -= basis.col(i).dot(e) * basis.col(i);
      const double len = e.norm();
      if (len <= 1e-14 * std::max(diam, 1e-300)) {
        fr.degenerate = true;
        fr.local.setZero();
        return fr;
      }
      basis.col(k) = e / len;
    }
    fr.local.col(0).setZero();
    for (int k = 0; k < d; ++k) fr.local.col(k + 1) = basis.transpose() * edges.col(k);
  }
  Eigen::MatrixXd system(d + 1, d + 1);
  system.topRows(d) = fr.local;
  system.row(d).setOnes();
  Eigen::MatrixXd edge_local(d, d);
  for (int k = 0; k < d; ++k) edge_local.col(k) = fr.local.col(k + 1) - fr.local.col(0);
  const double det = edge_local.determinant();
  fr.volume = std::abs(det) / factorial(d);
  if (!(std::abs(det) > 1e-14 * std::pow(std::max(diam, 1e-300), d))) {
    fr.degenerate = true;
    return fr;
  }
  const Eigen::MatrixXd inv = system.inverse();
  fr.linear = inv.leftCols(d);
  fr.offset = inv.col(d);
  return fr;
}

inline std::vector<FaceFrame> make_face_frames(const SimplicialMesh& mesh) {
  std::vector<FaceFrame> frames;
  frames.reserve(mesh.num_faces());
  for (int j = 0; j < mesh.num_faces(); ++j) frames.push_back(make_face_frame(mesh, j));
  return frames;
}

/// A simplicial map Phi: M -> R^d given by one image point per vertex.
class SimplicialMap {
 public:
  SimplicialMap(std::shared_ptr<const SimplicialMesh> mesh, Eigen::MatrixXd images)
      : mesh_(std::move(mesh)), images_(std::move(images)) {
    if (!mesh_) throw InputError("simplicial map without a mesh");
    if (images_.rows() != mesh_->num_vertices()) {
      throw InputError("image count " + std::to_string(images_.rows()) + " does not match vertex count " +
                       std::to_string(mesh_->num_vertices()));
    }
    if (images_.cols() != mesh_->dim()) throw InputError("images must live in R^d");
    frames_ = std::make_shared<const std::vector<FaceFrame>>(make_face_frames(*mesh_));
  }

  /// Same mesh (and cached frames), new images.
  SimplicialMap with_images(Eigen::MatrixXd images) const {
    SimplicialMap out(*this);
    if (images.rows() != images_.rows() || images.cols() != images_.cols()) {
      throw InputError("replacement images have the wrong shape");
    }
    out.images_ = std::move(images);
    return out;
  }

  const SimplicialMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SimplicialMesh>& mesh_ptr() const { return mesh_; }
  int dim() const { return mesh_->dim(); }
  /// Row-per-vertex image coordinates.
  const Eigen::MatrixXd& images() const { return images_; }
  Eigen::VectorXd image(int v) const { return images_.row(v).transpose(); }

  /// d x (d+1) matrix of the corner images of face j.
  Eigen::MatrixXd face_images(int j) const {
    const auto& f = mesh_->face(j);
    Eigen::MatrixXd u(dim(), f.size());
    for (std::size_t k = 0; k < f.size(); ++k) u.col(k) = image(f[k]);
    return u;
  }

  /// Source frames, computed at construction and shared by copies of the map.
  const std::vector<FaceFrame>& frames() const { return *frames_; }

 private:
  std::shared_ptr<const SimplicialMesh> mesh_;
  Eigen::MatrixXd images_;
  std::shared_ptr<const std::vector<FaceFrame>> frames_;
};

struct AffineFaceMap {
  int face_id = -1;
  Eigen::MatrixXd linear_part;  ///< A_j
  Eigen::VectorXd translation;  ///< delta_j
  Eigen::MatrixXd frame;        ///< corner coordinates the map is expressed in
};

/// Solves [A delta] [v; 1] = u over the d+1 corners of face j.
inline AffineFaceMap face_affine_map(const SimplicialMap& map, int j) {
  const FaceFrame& fr = map.frames().at(j);
  if (fr.degenerate) throw InputError("source face " + std::to_string(j) + " is degenerate");
  const Eigen::MatrixXd u = map.face_images(j);
  AffineFaceMap out;
  out.face_id = j;
  out.linear_part = u * fr.linear;
  out.translation = u * fr.offset;
  out.frame = fr.local;
  return out;
}

/// Similarity / anti-similarity split of a square matrix.
struct BCDecomposition {
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
};

/// B = (A - A^T + tr(A) I) / 2, C = (A + A^T - tr(A) I) / 2. At d = 2 these
/// satisfy |B|_F^2 - |C|_F^2 = 2 det(A) and B is a scaled rotation.
inline BCDecomposition bc_decompose(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw InputError("bc_decompose needs a square matrix");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  const double tr = A.trace();
  return {(A - A.transpose() + tr * I) / 2.0, (A + A.transpose() - tr * I) / 2.0};
}

enum class OrientationClass { orientation_preserving, orientation_reversing, mixed, degenerate };

inline const char* to_string(OrientationClass c) {
  switch (c) {
    case OrientationClass::orientation_preserving: return "orientation_preserving";
    case OrientationClass::orientation_reversing: return "orientation_reversing";
    case OrientationClass::mixed: return "mixed";
    case OrientationClass::degenerate: return "degenerate";
  }
  return "unknown";
}

struct OrientationReport {
  std::vector<double> determinants;  ///< det(A_j) per face
  OrientationClass classification = OrientationClass::degenerate;
  std::vector<int> degenerate_faces;
  std::vector<int> positive_faces;
  std::vector<int> negative_faces;
  double eps_det = 0.0;
};

/// Scale-free degeneracy measure det(A) / |A|_F^d. Zero for A = 0.
inline double normalized_determinant(const Eigen::MatrixXd& A) {
  const double norm = A.norm();
  if (norm == 0.0) return 0.0;
  return A.determinant() / std::pow(norm, static_cast<double>(A.rows()));
}

/// Classifies every face as preserving, reversing or degenerate. A face is
/// degenerate when |det(A_j)| <= eps_det * |A_j|_F^d.
inline OrientationReport orientation_report(const SimplicialMap& map, double eps_det = 1e-12) {
  OrientationReport rep;
  rep.eps_det = eps_det;
  const int nf = map.mesh().num_faces();
  rep.determinants.resize(nf);
  for (int j = 0; j < nf; ++j) {
    if (map.frames()[j].degenerate) {
      rep.determinants[j] = 0.0;
      rep.degenerate_faces.push_back(j);
      continue;
    }
    const Eigen::MatrixXd A = face_affine_map(map, j).linear_part;
    rep.determinants[j] = A.determinant();
    const double nd = normalized_determinant(A);
    if (std::abs(nd) <= eps_det) {
      rep.degenerate_faces.push_back(j);
    } else if (nd > 0) {
      rep.positive_faces.push_back(j);
    } else {
      rep.negative_faces.push_back(j);
    }
  }
  if (!rep.degenerate_faces.empty()) {
    rep.classification = OrientationClass::degenerate;
  } else if (!rep.positive_faces.empty() && !rep.negative_faces.empty()) {
    rep.classification = OrientationClass::mixed;
  } else if (!rep.positive_faces.empty()) {
    rep.classification = OrientationClass::orientation_preserving;
  } else {
    rep.classification = OrientationClass::orientation_reversing;
  }
  return rep;
}

/// Per-face Frobenius norms |A_j|_F (the gradient norm of the map).
inline std::vector<double> gradient_norms(const SimplicialMap& map) {
  std::vector<double> out(map.mesh().num_faces());
  for (int j = 0; j < map.mesh().num_faces(); ++j) out[j] = face_affine_map(map, j).linear_part.norm();
  return out;
}

/// Dirichlet energy sum_j |A_j|_F^2 area(f_j), source areas. Triangle meshes only.
inline double dirichlet_energy(const SimplicialMap& map) {
  if (map.dim() != 2) throw ParameterError("Dirichlet energy is defined for triangle meshes only");
  const auto& frames = map.frames();
  double energy = 0.0;
  for (int j = 0; j < map.mesh().num_faces(); ++j) {
    energy += face_affine_map(map, j).linear_part.squaredNorm() * frames[j].volume;
  }
  return energy;
}

/// Ratio of largest to smallest singular value of a 2x2 matrix (infinity if singular).
inline double condition_number(const Eigen::Matrix2d& A) {
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(A);
  const auto s = svd.singularValues();
  if (s(1) <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(1);
}

}  // namespace bijmap
