#include <gtest/gtest.h>

#include <random>

#include "bijmap/certify.hpp"
#include "bijmap/cone_opt.hpp"
#include "bijmap/degree.hpp"
#include "bijmap/fixtures.hpp"
#include "oracles.hpp"

using namespace bijmap;

namespace {

SimplicialMap identity(const std::shared_ptr<const SimplicialMesh>& m) { return SimplicialMap(m, m->vertices()); }

bool has_kind(const Certificate& c, const std::string& kind) {
  for (const auto& e : c.evidence) {
    if (e.kind == kind) return true;
  }
  return false;
}

/// Tutte map of grid_disk(n) with uniform boundary on the unit square.
struct TutteCase {
  std::shared_ptr<const SimplicialMesh> mesh;
  Polytope2 polygon = fixtures::unit_square();
  std::vector<int> assignment;
  SimplicialMap map;
};

TutteCase tutte_case(int n) {
  auto m = fixtures::grid_disk(n);
  auto poly = fixtures::unit_square();
  const auto a = fixtures::grid_square_assignment(*m, n);
  const BoundaryAssignment A(*m, poly, a);
  const auto pos = uniform_boundary_positions(*m, poly, A);
  return {m, poly, a, SimplicialMap(m, fixtures::tutte_images(*m, pos))};
}

/// 3 x 3 grid with the center cell removed: two boundary loops.
std::shared_ptr<const SimplicialMesh> annulus() {
  auto g = fixtures::grid_square(3);
  std::vector<std::vector<int>> faces;
  for (int j = 0; j < g->num_faces(); ++j) {
    if (j / 2 != 4) faces.push_back(g->face(j));
  }
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < g->num_vertices(); ++i) pts.push_back(g->vertex(i));
  return fixtures::make_mesh(pts, faces);
}

}  // namespace

TEST(Polygon, BasicMeasures) {
  const Polytope2 L = fixtures::l_polygon(2, 2);
  EXPECT_NEAR(L.area(), 3.0, 1e-15);
  EXPECT_NEAR(L.perimeter(), 8.0, 1e-15);
  EXPECT_NEAR(L.diameter(), std::sqrt(8.0), 1e-15);
  EXPECT_NEAR(L.edge_offset(3), 4.0, 1e-15);
  EXPECT_LT((L.point_at(4.5) - Eigen::Vector2d(1, 1.5)).norm(), 1e-15);
  EXPECT_NEAR(L.perimeter_parameter(Eigen::Vector2d(1, 1.5)), 4.5, 1e-15);
  EXPECT_LT((L.edge_normal(0) - Eigen::Vector2d(0, -1)).norm(), 1e-15);
}

TEST(Polygon, RejectsClockwiseSelfIntersectingAndCollinear) {
  EXPECT_THROW(Polytope2({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), ParameterError);
  EXPECT_THROW(Polytope2({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), ParameterError);
  EXPECT_THROW(Polytope2({{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0, 1}}), ParameterError);
  EXPECT_THROW(Polytope2({{0, 0}, {1, 0}}), ParameterError);
}

TEST(Polygon, MergeCollinearEdges) {
  std::vector<int> edge_map;
  const Polytope2 p = Polytope2::merged({{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0.5}}, &edge_map);
  EXPECT_EQ(p.size(), 4);
  EXPECT_EQ(edge_map, (std::vector<int>{0, 0, 1, 2, 3, 3}));
}

TEST(Polygon, ZeroAreaAfterMergeIsAParameterError) {
  EXPECT_THROW(Polytope2::merged({{0, 0}, {1, 0}, {2, 0}, {1, 0}}), ParameterError);
}

TEST(PolygonProperty, WindingMatchesEvenOddOracle) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> U(-0.5, 3.0);
  const Polytope2 L = fixtures::l_polygon(3, 2.5);
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::Vector2d q(U(rng), U(rng));
    if (L.boundary_distance(q) < 1e-9) continue;
    EXPECT_EQ(L.contains(q), oracle::inside_polygon(L.vertices(), q));
    EXPECT_EQ(L.winding_number(q), oracle::winding_by_angles(L.vertices(), q));
  }
}

TEST(Assignment, DerivedPinsAtCorners) {
  auto m = fixtures::grid_square(3);
  const Polytope2 sq = fixtures::unit_square();
  const BoundaryAssignment A(*m, sq, fixtures::grid_square_assignment(*m, 3));
  int pinned = 0;
  for (std::size_t i = 0; i < A.derived_pins().size(); ++i) {
    if (const auto* p = std::get_if<Pinned>(&A.derived_pins()[i])) {
      ++pinned;
      // the pin must be the mesh corner's own position on the unit square
      EXPECT_LT((p->point - m->vertex(A.loop()[i])).norm(), 1e-12);
    } else {
      const auto& f = std::get<FreeOnLine>(A.derived_pins()[i]);
      EXPECT_LT(oracle::line_distance(f.point, f.point + f.direction, m->vertex(A.loop()[i])), 1e-12);
    }
  }
  EXPECT_EQ(pinned, 4);
}

TEST(Assignment, RangeAndSizeErrors) {
  auto m = fixtures::grid_square(3);
  const Polytope2 sq = fixtures::unit_square();
  EXPECT_THROW(BoundaryAssignment(*m, sq, std::vector<int>(11, 0)), InputError);
  std::vector<int> bad = fixtures::grid_square_assignment(*m, 3);
  bad[5] = 4;
  EXPECT_THROW(BoundaryAssignment(*m, sq, bad), InputError);
}

TEST(Feasibility, ThreeEdgesPerSide) {
  auto m = fixtures::grid_square(3);
  const Polytope2 sq = fixtures::unit_square();
  const auto f = assignment_feasibility(*m, sq, BoundaryAssignment(*m, sq, uniform_assignment(12, 4)));
  EXPECT_TRUE(f.feasible);
  EXPECT_EQ(f.winding, 1);
}

TEST(Feasibility, UncoveredEdge) {
  auto m = fixtures::grid_square(3);
  const Polytope2 sq = fixtures::unit_square();
  std::vector<int> a{0, 0, 0, 1, 1, 1, 1, 1, 1, 3, 3, 3};
  const auto f = assignment_feasibility(*m, sq, BoundaryAssignment(*m, sq, a));
  EXPECT_FALSE(f.feasible);
  EXPECT_EQ(f.uncovered_edge, 2);
  EXPECT_NE(f.reason.find("polygon edge 2"), std::string::npos);
}

TEST(Feasibility, DoubleWinding) {
  auto m = fixtures::grid_square(3);
  const Polytope2 sq = fixtures::unit_square();
  std::vector<int> a;
  for (int i = 0; i < 12; ++i) a.push_back((i * 8 / 12) % 4);
  const auto f = assignment_feasibility(*m, sq, BoundaryAssignment(*m, sq, a));
  EXPECT_FALSE(f.feasible);
  EXPECT_EQ(f.winding, 2);
}

TEST(Feasibility, BackwardsStepIsRejected) {
  auto m = fixtures::grid_square(3);
  const Polytope2 sq = fixtures::unit_square();
  std::vector<int> a{0, 0, 0, 1, 1, 1, 2, 1, 2, 3, 3, 3};
  EXPECT_FALSE(assignment_feasibility(*m, sq, BoundaryAssignment(*m, sq, a)).feasible);
}

TEST(Feasibility, SeveralLoopsAreUnsupported) {
  auto m = annulus();
  EXPECT_EQ(m->boundary().loops.size(), 2u);
  EXPECT_THROW(disk_boundary_loop(*m), UnsupportedTopologyError);
  EXPECT_THROW(BoundaryAssignment(*m, fixtures::unit_square(), std::vector<int>(16, 0)), UnsupportedTopologyError);
}

TEST(Necessary, IdentityFoldAndReflection) {
  EXPECT_TRUE(check_necessary(identity(fixtures::grid_disk(3))).certified());
  const Certificate fold = check_necessary(fixtures::fold_fan());
  EXPECT_FALSE(fold.certified());
  ASSERT_EQ(fold.evidence.size(), 1u);
  EXPECT_EQ(fold.evidence[0].kind, "flipped_face");
  EXPECT_EQ(fold.evidence[0].index, 1);
  auto m = fixtures::grid_square(2);
  Eigen::MatrixXd u = m->vertices();
  u.col(0) *= -1;
  const Certificate refl = check_necessary(SimplicialMap(m, u));
  EXPECT_FALSE(refl.certified());
  EXPECT_EQ(static_cast<int>(refl.evidence.size()), m->num_faces());
}

TEST(T1, IdentityAndTutteMapsAreCertified) {
  auto m = fixtures::grid_square(3);
  EXPECT_TRUE(certify_T1(identity(m), fixtures::unit_square()).certified());
  const TutteCase t = tutte_case(5);
  const Certificate c = certify_T1(t.map, t.polygon);
  EXPECT_TRUE(c.certified()) << describe(c);
}

TEST(T1, CoincidentBoundaryImagesAreRefuted) {
  const TutteCase t = tutte_case(5);
  Eigen::MatrixXd u = t.map.images();
  const auto& loop = disk_boundary_loop(*t.mesh);
  u.row(loop[2]) = u.row(loop[1]);
  const Certificate c = certify_T1(SimplicialMap(t.mesh, u), t.polygon);
  EXPECT_FALSE(c.certified());
  EXPECT_TRUE(has_kind(c, "non_injective_boundary"));
}

TEST(T1, FoldIsRefuted) {
  const Polytope2 sq({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
  EXPECT_FALSE(certify_T1(fixtures::fold_fan(), sq).certified());
}

TEST(T1, WrappedBoundaryIsRefuted) {
  const SimplicialMap wrap = fixtures::wrap2_fan();
  const Polytope2 hex = Polytope2({{1, 0}, {0.5, 0.9}, {-0.5, 0.9}, {-1, 0}, {-0.5, -0.9}, {0.5, -0.9}});
  EXPECT_FALSE(certify_T1(wrap, hex).certified());
}

TEST(SlitMap, CertifiedByT2RefutedByT1AndT3) {
  const auto s = fixtures::slit_l_map();
  const BoundaryAssignment A(s.map.mesh(), s.polygon, s.assignment);
  EXPECT_TRUE(check_necessary(s.map).certified());
  const Certificate t2 = certify_T2(s.map, s.polygon, A);
  EXPECT_TRUE(t2.certified()) << describe(t2);
  const Certificate t1 = certify_T1(s.map, s.polygon);
  EXPECT_FALSE(t1.certified());
  EXPECT_TRUE(has_kind(t1, "off_boundary"));
  const Certificate t3 = certify_T3(s.map, s.polygon, A);
  EXPECT_FALSE(t3.certified());
  EXPECT_TRUE(has_kind(t3, "boundary_orientation"));
}

TEST(SlitMap, InteriorInjectiveAndOnto) {
  // the conclusions T2 still guarantees, checked with the pre-image oracle
  const auto s = fixtures::slit_l_map();
  std::mt19937 rng(33);
  std::uniform_real_distribution<double> U(-0.3, 2.3);
  int inside = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::Vector2d q(U(rng), U(rng));
    if (s.polygon.lines_distance(q) < 1e-6 || distance_to_facet_images(s.map, q) < 1e-6) continue;
    const int count = preimage_count(s.map, q).count;
    const bool in = oracle::inside_polygon(s.polygon.vertices(), q);
    EXPECT_EQ(count, in ? 1 : 0) << q.transpose();
    inside += in;
  }
  EXPECT_GT(inside, 100);
}

TEST(T2, PerturbedBoundaryVertexIsRefutedWithResidual) {
  const TutteCase t = tutte_case(5);
  const BoundaryAssignment A(*t.mesh, t.polygon, t.assignment);
  EXPECT_TRUE(certify_T2(t.map, t.polygon, A).certified());
  Eigen::MatrixXd u = t.map.images();
  const int pos = 2;  // interior of the first run, on y = 0
  u(A.loop()[pos], 1) -= 1e-3;
  const Certificate c = certify_T2(SimplicialMap(t.mesh, u), t.polygon, A);
  EXPECT_FALSE(c.certified());
  bool found = false;
  for (const auto& e : c.evidence) {
    if (e.kind == "line_residual" && e.index == pos) {
      found = true;
      EXPECT_NEAR(e.residual, 1e-3, 1e-12);
    }
  }
  EXPECT_TRUE(found) << describe(c);
}

TEST(T2, InfeasibleAssignmentIsAPreconditionError) {
  const TutteCase t = tutte_case(3);
  std::vector<int> a(t.assignment.size(), 0);
  a.back() = 1;
  a[a.size() - 2] = 2;
  const BoundaryAssignment A(*t.mesh, t.polygon, a);
  EXPECT_THROW(certify_T2(t.map, t.polygon, A), PreconditionError);
  EXPECT_THROW(certify_T3(t.map, t.polygon, A), PreconditionError);
}

TEST(T3, MonotoneRunsAreCertified) {
  const TutteCase t = tutte_case(5);
  const BoundaryAssignment A(*t.mesh, t.polygon, t.assignment);
  const Certificate c = certify_T3(t.map, t.polygon, A);
  EXPECT_TRUE(c.certified()) << describe(c);
}

TEST(T3, SwappedNeighboursAreRefuted) {
  const TutteCase t = tutte_case(5);
  const BoundaryAssignment A(*t.mesh, t.polygon, t.assignment);
  // find two consecutive non-corner vertices on the same run and swap their images
  Eigen::MatrixXd u = t.map.images();
  int i = -1;
  for (int k = 0; k + 2 < A.num_boundary_edges(); ++k) {
    if (A.polyedge(k) == A.polyedge(k + 1) && A.polyedge(k + 1) == A.polyedge(k + 2)) {
      i = k + 1;
      break;
    }
  }
  ASSERT_GE(i, 0);
  const int a = A.loop()[i], b = A.loop()[i + 1];
  u.row(a).swap(u.row(b));
  const SimplicialMap swapped(t.mesh, u);
  const Certificate c = certify_T3(swapped, t.polygon, A);
  EXPECT_FALSE(c.certified());
  EXPECT_TRUE(has_kind(c, "boundary_orientation"));
  EXPECT_FALSE(certify_T1(swapped, t.polygon).certified());
}

TEST(T3, EqualParametersAreRefuted) {
  const TutteCase t = tutte_case(5);
  const BoundaryAssignment A(*t.mesh, t.polygon, t.assignment);
  Eigen::MatrixXd u = t.map.images();
  u.row(A.loop()[2]) = u.row(A.loop()[1]);
  const Certificate c = certify_T3(SimplicialMap(t.mesh, u), t.polygon, A);
  EXPECT_FALSE(c.certified());
  EXPECT_TRUE(has_kind(c, "non_monotone"));
}

TEST(T3, ReversedEdgeOnItsLineIsRefuted) {
  // reverse two images along the bottom run
  const TutteCase t = tutte_case(4);
  const BoundaryAssignment A(*t.mesh, t.polygon, t.assignment);
  Eigen::MatrixXd u = t.map.images();
  int start = -1;
  for (int k = 0; k < A.num_boundary_edges(); ++k) {
    if (A.polyedge(k) == 0 && A.polyedge((k + A.num_boundary_edges() - 1) % A.num_boundary_edges()) != 0) start = k;
  }
  ASSERT_GE(start, 0);
  const int v1 = A.loop()[start + 1], v2 = A.loop()[start + 2];
  u(v1, 0) = 0.5;
  u(v2, 0) = 0.25;
  const Certificate c = certify_T3(SimplicialMap(t.mesh, u), t.polygon, A);
  EXPECT_FALSE(c.certified());
  EXPECT_TRUE(has_kind(c, "boundary_orientation"));
}

TEST(CertifyProperty, T1ImpliesUniquePreimages) {
  const TutteCase t = tutte_case(5);
  ASSERT_TRUE(certify_T1(t.map, t.polygon).certified());
  std::mt19937 rng(34);
  std::uniform_real_distribution<double> U(-0.4, 1.4);
  int checked = 0;
  while (checked < 1000) {
    const Eigen::Vector2d q(U(rng), U(rng));
    if (distance_to_facet_images(t.map, q) < 1e-9 || t.polygon.boundary_distance(q) < 1e-9) continue;
    EXPECT_EQ(preimage_count(t.map, q).count, oracle::inside_polygon(t.polygon.vertices(), q) ? 1 : 0);
    ++checked;
  }
}
