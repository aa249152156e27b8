#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kvfem/mesh.hpp"
#include "kvfem/types.hpp"

namespace kvfem {

inline constexpr std::size_t kP2NodesPerCell = 6;

/// Values and reference-coordinate gradients of the six quadratic Lagrange
/// basis functions. Node order: v0, v1, v2, mid(v0v1), mid(v1v2), mid(v2v0).
struct P2BasisEval {
  std::array<double, kP2NodesPerCell> values;
  std::array<std::array<double, 2>, kP2NodesPerCell> gradients;
};

P2BasisEval p2_basis_at(Point ref);

/// Reference node coordinates in the order used by p2_basis_at.
const std::array<Point, kP2NodesPerCell>& p2_reference_nodes();

/// Symmetric Gauss rule on the reference triangle; weights sum to 1/2.
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Smallest tabulated rule exact to at least `degree` (2..6). Throws
/// std::invalid_argument otherwise.
const QuadratureRule& quadrature(int degree);

inline constexpr int kAssemblyQuadratureDegree = 5;
inline constexpr int kErrorQuadratureDegree = 6;

/// Degree-of-freedom numbering for continuous P2 velocity and P0 pressure.
///
/// Scalar velocity dofs are the mesh vertices followed by the edge midpoints.
/// Vector velocity coefficients are blocked: component c of scalar dof d sits
/// at c * n_velocity_scalar_dofs() + d.
class DofMap {
 public:
  explicit DofMap(const TriMesh& mesh);

  std::size_t n_velocity_scalar_dofs() const { return nodes_.size(); }
  std::size_t n_velocity_dofs() const { return 2 * nodes_.size(); }
  std::size_t n_pressure_dofs() const { return n_pressure_; }
  std::size_t n_total_dofs() const { return n_velocity_dofs() + n_pressure_; }

  const std::array<std::size_t, kP2NodesPerCell>& cell_dofs(std::size_t cell) const {
    return cell_dofs_.at(cell);
  }
  std::size_t velocity_index(std::size_t component, std::size_t scalar_dof) const {
    return component * nodes_.size() + scalar_dof;
  }

  Point node(std::size_t scalar_dof) const { return nodes_.at(scalar_dof); }
  const std::vector<Point>& nodes() const { return nodes_; }

  bool is_dirichlet(std::size_t scalar_dof) const { return dirichlet_mask_.at(scalar_dof); }
  const std::vector<bool>& dirichlet_mask() const { return dirichlet_mask_; }
  /// Scalar dofs on the boundary, ascending.
  const std::vector<std::size_t>& dirichlet_dofs() const { return dirichlet_dofs_; }

 private:
  std::size_t n_pressure_ = 0;
  std::vector<Point> nodes_;
  std::vector<std::array<std::size_t, kP2NodesPerCell>> cell_dofs_;
  std::vector<bool> dirichlet_mask_;
  std::vector<std::size_t> dirichlet_dofs_;
};

inline DofMap build_dof_map(const TriMesh& mesh) { return DofMap(mesh); }

/// Nodal interpolant of a vector field into blocked velocity coefficients.
template <typename Field>
std::vector<double> interpolate_velocity(const DofMap& dofs, Field&& field) {
  const std::size_t nv = dofs.n_velocity_scalar_dofs();
  std::vector<double> coeffs(2 * nv);
  for (std::size_t d = 0; d < nv; ++d) {
    const Vec2 v = field(dofs.node(d));
    coeffs[d] = v.x;
    coeffs[nv + d] = v.y;
  }
  return coeffs;
}

}  // namespace kvfem
