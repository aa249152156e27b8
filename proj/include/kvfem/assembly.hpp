#pragma once

#include <functional>
#include <span>
#include <vector>

#include "kvfem/fem_space.hpp"
#include "kvfem/mesh.hpp"
#include "kvfem/sparse.hpp"

namespace kvfem {

/// Linear operators of the weak form in blocked velocity layout.
///
/// mass and stiffness act on both velocity components (block diagonal) and
/// share the sparsity pattern of every convection matrix. divergence has one
/// row per pressure cell: row K of divergence * u is the integral of div u
/// over K.
struct OperatorSet {
  SparseMatrix mass;
  SparseMatrix stiffness;
  SparseMatrix divergence;
};

OperatorSet assemble_operators(const TriMesh& mesh, const DofMap& dofs,
                               const QuadratureRule& rule = quadrature(kAssemblyQuadratureDegree));

/// Skew-symmetrized convection matrix C(w): for coefficient vectors u and
/// phi, phi^T C(w) u = 1/2 (w.grad u, phi) - 1/2 (w.grad phi, u).
/// C(w) is exactly antisymmetric entry by entry.
SparseMatrix assemble_convection(const TriMesh& mesh, const DofMap& dofs, std::span<const double> w,
                                 const QuadratureRule& rule = quadrature(kAssemblyQuadratureDegree));

/// Load vector (f, phi_i) over all blocked velocity test functions.
std::vector<double> assemble_load(const TriMesh& mesh, const DofMap& dofs, const std::function<Vec2(Point)>& f,
                                  const QuadratureRule& rule = quadrature(kErrorQuadratureDegree));

/// Prescribed values for a set of global unknowns.
struct DirichletData {
  std::vector<int> indices;
  std::vector<double> values;
};

/// Boundary data g sampled at every Dirichlet node, both components.
DirichletData velocity_dirichlet_data(const DofMap& dofs, const std::function<Vec2(Point)>& g);

/// Symmetric elimination: known values move to the right-hand side, the
/// constrained rows and columns are zeroed and their diagonal set to 1, so
/// the solution reproduces the prescribed values exactly. The diagonal of
/// every constrained row must be in the sparsity pattern.
void apply_dirichlet(SparseMatrix& system, std::span<double> rhs, const DirichletData& bc);

}  // namespace kvfem
