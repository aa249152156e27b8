#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kvfem/fem_space.hpp"

namespace kvfem {
namespace {

// Collapsed Gauss-Legendre (Duffy) rule on the reference triangle, used as an
// independent oracle for the symmetric rules under test.
double duffy_integral(int a, int b) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                              0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double u = 0.5 * (x[i] + 1.0);
      const double v = 0.5 * (x[j] + 1.0);
      const double px = u;
      const double py = v * (1.0 - u);
      sum += 0.25 * w[i] * w[j] * (1.0 - u) * std::pow(px, a) * std::pow(py, b);
    }
  }
  return sum;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

TEST(Quadrature, DuffyOracleMatchesClosedForm) {
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b)
      EXPECT_NEAR(duffy_integral(a, b), factorial(a) * factorial(b) / factorial(a + b + 2), 1e-15);
}

TEST(Quadrature, WeightsSumToReferenceArea) {
  for (int degree = 2; degree <= 6; ++degree) {
    const QuadratureRule& rule = quadrature(degree);
    EXPECT_NEAR(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0), 0.5, 1e-15);
    EXPECT_GE(rule.degree, degree);
    EXPECT_EQ(rule.points.size(), rule.weights.size());
  }
}

TEST(Quadrature, IntegratesMonomialsExactlyUpToDegree) {
  for (int degree = 2; degree <= 6; ++degree) {
    const QuadratureRule& rule = quadrature(degree);
    for (int a = 0; a <= rule.degree; ++a) {
      for (int b = 0; a + b <= rule.degree; ++b) {
        double q = 0.0;
        for (std::size_t i = 0; i < rule.points.size(); ++i)
          q += rule.weights[i] * std::pow(rule.points[i].x, a) * std::pow(rule.points[i].y, b);
        EXPECT_NEAR(q, duffy_integral(a, b), 1e-14) << "rule " << degree << " monomial " << a << "," << b;
      }
    }
  }
}

TEST(Quadrature, RuleSizes) {
  EXPECT_EQ(quadrature(2).points.size(), 3u);
  EXPECT_EQ(quadrature(4).points.size(), 6u);
  EXPECT_EQ(quadrature(5).points.size(), 7u);
  EXPECT_EQ(quadrature(6).points.size(), 12u);
}

TEST(Quadrature, RejectsUnsupportedDegree) {
  EXPECT_THROW(quadrature(1), std::invalid_argument);
  EXPECT_THROW(quadrature(7), std::invalid_argument);
}

TEST(P2Basis, KroneckerAtNodes) {
  const auto& nodes = p2_reference_nodes();
  for (std::size_t j = 0; j < kP2NodesPerCell; ++j) {
    const P2BasisEval e = p2_basis_at(nodes[j]);
    for (std::size_t i = 0; i < kP2NodesPerCell; ++i) EXPECT_NEAR(e.values[i], i == j ? 1.0 : 0.0, 1e-15);
  }
}

TEST(P2Basis, PartitionOfUnity) {
  const QuadratureRule& rule = quadrature(6);
  for (const Point& p : rule.points) {
    const P2BasisEval e = p2_basis_at(p);
    double sum = 0.0, gx = 0.0, gy = 0.0;
    for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
      sum += e.values[i];
      gx += e.gradients[i][0];
      gy += e.gradients[i][1];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
    EXPECT_NEAR(gx, 0.0, 1e-13);
    EXPECT_NEAR(gy, 0.0, 1e-13);
  }
}

TEST(P2Basis, GradientsMatchDifferenceQuotients) {
  const Point p{0.21, 0.37};
  const double eps = 1e-6;
  const P2BasisEval e = p2_basis_at(p);
  const P2BasisEval ex_plus = p2_basis_at({p.x + eps, p.y});
  const P2BasisEval ex_minus = p2_basis_at({p.x - eps, p.y});
  const P2BasisEval ey_plus = p2_basis_at({p.x, p.y + eps});
  const P2BasisEval ey_minus = p2_basis_at({p.x, p.y - eps});
  for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
    EXPECT_NEAR(e.gradients[i][0], (ex_plus.values[i] - ex_minus.values[i]) / (2 * eps), 1e-8);
    EXPECT_NEAR(e.gradients[i][1], (ey_plus.values[i] - ey_minus.values[i]) / (2 * eps), 1e-8);
  }
}

TEST(P2Basis, ReproducesQuadratics) {
  const auto& nodes = p2_reference_nodes();
  auto q = [](Point p) { return 1.0 - 2.0 * p.x + 3.0 * p.y + p.x * p.x - 4.0 * p.x * p.y + 2.5 * p.y * p.y; };
  for (const Point& p : quadrature(6).points) {
    const P2BasisEval e = p2_basis_at(p);
    double v = 0.0;
    for (std::size_t i = 0; i < kP2NodesPerCell; ++i) v += e.values[i] * q(nodes[i]);
    EXPECT_NEAR(v, q(p), 1e-14);
  }
}

TEST(DofMap, CountsOnStructuredMeshes) {
  for (std::size_t n : {1u, 2u, 5u, 16u}) {
    const TriMesh mesh = TriMesh::structured_unit_square(n);
    const DofMap dofs(mesh);
    EXPECT_EQ(dofs.n_velocity_scalar_dofs(), (2 * n + 1) * (2 * n + 1));
    EXPECT_EQ(dofs.n_velocity_dofs(), 2 * (2 * n + 1) * (2 * n + 1));
    EXPECT_EQ(dofs.n_pressure_dofs(), 2 * n * n);
    EXPECT_EQ(dofs.n_total_dofs(), dofs.n_velocity_dofs() + dofs.n_pressure_dofs());
    EXPECT_EQ(dofs.dirichlet_dofs().size(), 8 * n);
  }
}

TEST(DofMap, DirichletNodesLieOnBoundary) {
  const TriMesh mesh = TriMesh::structured_unit_square(4);
  const DofMap dofs(mesh);
  std::size_t count = 0;
  for (std::size_t d = 0; d < dofs.n_velocity_scalar_dofs(); ++d) {
    const Point p = dofs.node(d);
    const bool on_boundary = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
    EXPECT_EQ(dofs.is_dirichlet(d), on_boundary) << d;
    count += on_boundary;
  }
  EXPECT_EQ(count, dofs.dirichlet_dofs().size());
}

TEST(DofMap, CellDofsMatchGeometry) {
  const TriMesh mesh = TriMesh::structured_unit_square(3);
  const DofMap dofs(mesh);
  const auto& nodes = p2_reference_nodes();
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const AffineMap map = mesh.geometry(c);
    for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
      const Point expected = map.to_physical(nodes[i]);
      const Point got = dofs.node(dofs.cell_dofs(c)[i]);
      EXPECT_NEAR(got.x, expected.x, 1e-15);
      EXPECT_NEAR(got.y, expected.y, 1e-15);
    }
  }
}

TEST(DofMap, EveryDofIsUsed) {
  const TriMesh mesh = TriMesh::structured_unit_square(4);
  const DofMap dofs(mesh);
  std::vector<int> used(dofs.n_velocity_scalar_dofs(), 0);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c)
    for (std::size_t d : dofs.cell_dofs(c)) ++used[d];
  for (int u : used) EXPECT_GE(u, 1);
  EXPECT_EQ(dofs.n_pressure_dofs(), mesh.n_cells());
}

TEST(DofMap, BlockedVelocityIndex) {
  const TriMesh mesh = TriMesh::structured_unit_square(2);
  const DofMap dofs(mesh);
  EXPECT_EQ(dofs.velocity_index(0, 7), 7u);
  EXPECT_EQ(dofs.velocity_index(1, 7), dofs.n_velocity_scalar_dofs() + 7);
}

TEST(Interpolation, QuadraticFieldIsExactInsideCells) {
  const TriMesh mesh = TriMesh::structured_unit_square(3);
  const DofMap dofs(mesh);
  auto field = [](Point p) { return Vec2{p.x * p.y - 0.5 * p.y * p.y, 2.0 * p.x * p.x + p.y}; };
  const auto coeffs = interpolate_velocity(dofs, field);
  const std::size_t nv = dofs.n_velocity_scalar_dofs();
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const AffineMap map = mesh.geometry(c);
    for (const Point& ref : quadrature(4).points) {
      const P2BasisEval e = p2_basis_at(ref);
      double ux = 0.0, uy = 0.0;
      for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
        ux += e.values[i] * coeffs[dofs.cell_dofs(c)[i]];
        uy += e.values[i] * coeffs[nv + dofs.cell_dofs(c)[i]];
      }
      const Vec2 exact = field(map.to_physical(ref));
      EXPECT_NEAR(ux, exact.x, 1e-14);
      EXPECT_NEAR(uy, exact.y, 1e-14);
    }
  }
}

}  // namespace
}  // namespace kvfem
