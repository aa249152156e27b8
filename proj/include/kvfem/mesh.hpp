#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "kvfem/types.hpp"

namespace kvfem {

enum class BoundarySide { bottom, right, top, left };

struct BoundaryEdge {
  std::size_t edge;
  BoundarySide side;
};

/// Affine map from the reference triangle {(0,0),(1,0),(0,1)} onto a cell.
struct AffineMap {
  std::array<Point, 3> vertices;
  Mat2 jacobian;           // columns are v1 - v0 and v2 - v0
  Mat2 inverse_transpose;  // maps reference gradients to physical gradients
  double det = 0.0;        // |det J|, twice the cell area

  Point to_physical(Point ref) const;
  std::array<double, 2> physical_gradient(std::array<double, 2> ref_grad) const;
};

/// Structured triangulation of the unit square. Immutable once built.
///
/// Local edge k of a triangle (v0, v1, v2) joins (v0, v1), (v1, v2), (v2, v0)
/// for k = 0, 1, 2.
class TriMesh {
 public:
  /// Uniform n x n grid of squares, each cut along its lower-left to
  /// upper-right diagonal. Throws std::invalid_argument for n == 0.
  static TriMesh structured_unit_square(std::size_t n);

  std::size_t cells_per_side() const { return n_; }
  double h() const { return 1.0 / static_cast<double>(n_); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<std::size_t, 3>>& triangles() const { return triangles_; }
  const std::vector<std::array<std::size_t, 2>>& edges() const { return edges_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  std::size_t n_vertices() const { return vertices_.size(); }
  std::size_t n_cells() const { return triangles_.size(); }
  std::size_t n_edges() const { return edges_.size(); }

  const std::array<std::size_t, 3>& cell_edges(std::size_t cell) const { return cell_edges_.at(cell); }
  /// Cells adjacent to an edge; the second entry is empty on the boundary.
  const std::array<std::optional<std::size_t>, 2>& edge_cells(std::size_t edge) const {
    return edge_cells_.at(edge);
  }

  bool is_boundary_vertex(std::size_t vertex) const { return boundary_vertex_.at(vertex); }
  bool is_boundary_edge(std::size_t edge) const { return boundary_side_.at(edge).has_value(); }
  std::optional<BoundarySide> boundary_side(std::size_t edge) const { return boundary_side_.at(edge); }

  /// Throws std::out_of_range for an invalid cell index.
  AffineMap geometry(std::size_t cell) const;

 private:
  std::size_t n_ = 0;
  std::vector<Point> vertices_;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::vector<std::array<std::size_t, 2>> edges_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<std::array<std::size_t, 3>> cell_edges_;
  std::vector<std::array<std::optional<std::size_t>, 2>> edge_cells_;
  std::vector<bool> boundary_vertex_;
  std::vector<std::optional<BoundarySide>> boundary_side_;
};

}  // namespace kvfem
