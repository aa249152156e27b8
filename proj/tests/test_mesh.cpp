#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "kvfem/mesh.hpp"

namespace kvfem {
namespace {

double signed_area(const TriMesh& mesh, std::size_t cell) {
  const auto& t = mesh.triangles()[cell];
  const Point& a = mesh.vertices()[t[0]];
  const Point& b = mesh.vertices()[t[1]];
  const Point& c = mesh.vertices()[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

TEST(StructuredMesh, SingleSquareCounts) {
  const TriMesh mesh = TriMesh::structured_unit_square(1);
  EXPECT_EQ(mesh.n_vertices(), 4u);
  EXPECT_EQ(mesh.n_cells(), 2u);
  EXPECT_EQ(mesh.n_edges(), 5u);
  EXPECT_EQ(mesh.boundary_edges().size(), 4u);
}

TEST(StructuredMesh, FourByFourCounts) {
  const TriMesh mesh = TriMesh::structured_unit_square(4);
  EXPECT_EQ(mesh.n_vertices(), 25u);
  EXPECT_EQ(mesh.n_cells(), 32u);
  EXPECT_EQ(mesh.n_edges(), 56u);
  EXPECT_EQ(mesh.boundary_edges().size(), 16u);
  EXPECT_DOUBLE_EQ(mesh.h(), 0.25);
}

TEST(StructuredMesh, RejectsZeroCells) { EXPECT_THROW(TriMesh::structured_unit_square(0), std::invalid_argument); }

TEST(StructuredMesh, AreasPartitionTheSquare) {
  const TriMesh mesh = TriMesh::structured_unit_square(2);
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) total += signed_area(mesh, c);
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(StructuredMesh, CountsAndAreaForAllSizesUpTo64) {
  for (std::size_t n = 1; n <= 64; ++n) {
    const TriMesh mesh = TriMesh::structured_unit_square(n);
    ASSERT_EQ(mesh.n_vertices(), (n + 1) * (n + 1));
    ASSERT_EQ(mesh.n_cells(), 2 * n * n);
    ASSERT_EQ(mesh.n_edges(), 3 * n * n + 2 * n);
    ASSERT_EQ(mesh.boundary_edges().size(), 4 * n);
    double total = 0.0;
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      const double a = signed_area(mesh, c);
      ASSERT_GT(a, 0.0) << "cell " << c << " n=" << n;
      total += a;
    }
    ASSERT_NEAR(total, 1.0, 1e-12) << "n=" << n;
  }
}

TEST(StructuredMesh, EdgeCellIncidenceIsConsistent) {
  for (std::size_t n : {1u, 3u, 8u}) {
    const TriMesh mesh = TriMesh::structured_unit_square(n);
    std::vector<int> uses(mesh.n_edges(), 0);
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      const auto& tri = mesh.triangles()[c];
      for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t e = mesh.cell_edges(c)[k];
        ++uses[e];
        const auto& ev = mesh.edges()[e];
        const std::set<std::size_t> expected{tri[k], tri[(k + 1) % 3]};
        EXPECT_EQ((std::set<std::size_t>{ev[0], ev[1]}), expected);
        const auto& cells = mesh.edge_cells(e);
        EXPECT_TRUE(cells[0] == c || cells[1] == c);
      }
    }
    for (std::size_t e = 0; e < mesh.n_edges(); ++e) {
      const int expected = mesh.is_boundary_edge(e) ? 1 : 2;
      EXPECT_EQ(uses[e], expected) << "edge " << e;
      EXPECT_EQ(mesh.edge_cells(e)[1].has_value(), !mesh.is_boundary_edge(e));
    }
  }
}

TEST(StructuredMesh, BoundarySidesAreTagged) {
  const TriMesh mesh = TriMesh::structured_unit_square(3);
  std::array<int, 4> per_side{};
  for (const auto& be : mesh.boundary_edges()) {
    ++per_side[static_cast<int>(be.side)];
    const auto& ev = mesh.edges()[be.edge];
    const Point& a = mesh.vertices()[ev[0]];
    const Point& b = mesh.vertices()[ev[1]];
    switch (be.side) {
      case BoundarySide::bottom:
        EXPECT_TRUE(a.y == 0.0 && b.y == 0.0);
        break;
      case BoundarySide::right:
        EXPECT_TRUE(a.x == 1.0 && b.x == 1.0);
        break;
      case BoundarySide::top:
        EXPECT_TRUE(a.y == 1.0 && b.y == 1.0);
        break;
      case BoundarySide::left:
        EXPECT_TRUE(a.x == 0.0 && b.x == 0.0);
        break;
    }
  }
  for (int count : per_side) EXPECT_EQ(count, 3);
}

TEST(TriangleGeometry, UnitSquareCells) {
  const TriMesh mesh = TriMesh::structured_unit_square(1);
  for (std::size_t c = 0; c < 2; ++c) {
    const AffineMap map = mesh.geometry(c);
    EXPECT_DOUBLE_EQ(map.det, 1.0);
    const Point p = map.to_physical({0.0, 0.0});
    const Point& v0 = mesh.vertices()[mesh.triangles()[c][0]];
    EXPECT_DOUBLE_EQ(p.x, v0.x);
    EXPECT_DOUBLE_EQ(p.y, v0.y);
  }
}

TEST(TriangleGeometry, ScalesWithMeshSize) {
  const TriMesh mesh = TriMesh::structured_unit_square(2);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) EXPECT_DOUBLE_EQ(mesh.geometry(c).det, 0.25);
}

TEST(TriangleGeometry, MapsReferenceVerticesAndGradients) {
  const TriMesh mesh = TriMesh::structured_unit_square(5);
  const AffineMap map = mesh.geometry(17);
  const auto& tri = mesh.triangles()[17];
  const Point refs[3] = {{0, 0}, {1, 0}, {0, 1}};
  for (std::size_t k = 0; k < 3; ++k) {
    const Point p = map.to_physical(refs[k]);
    EXPECT_NEAR(p.x, mesh.vertices()[tri[k]].x, 1e-15);
    EXPECT_NEAR(p.y, mesh.vertices()[tri[k]].y, 1e-15);
  }
  // The reference function xi has physical gradient J^{-T} e_1; check it
  // against a difference quotient along the physical edge v0 -> v1.
  const auto g = map.physical_gradient({1.0, 0.0});
  const Point d{map.jacobian[0][0], map.jacobian[1][0]};
  EXPECT_NEAR(g[0] * d.x + g[1] * d.y, 1.0, 1e-13);
  const Point e{map.jacobian[0][1], map.jacobian[1][1]};
  EXPECT_NEAR(g[0] * e.x + g[1] * e.y, 0.0, 1e-13);
}

TEST(TriangleGeometry, RejectsOutOfRangeCell) {
  const TriMesh mesh = TriMesh::structured_unit_square(1);
  EXPECT_THROW(mesh.geometry(2), std::out_of_range);
}

}  // namespace
}  // namespace kvfem
