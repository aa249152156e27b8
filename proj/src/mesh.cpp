#include "kvfem/mesh.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace kvfem {

Point AffineMap::to_physical(Point ref) const {
  return {vertices[0].x + jacobian[0][0] * ref.x + jacobian[0][1] * ref.y,
          vertices[0].y + jacobian[1][0] * ref.x + jacobian[1][1] * ref.y};
}

std::array<double, 2> AffineMap::physical_gradient(std::array<double, 2> g) const {
  return {inverse_transpose[0][0] * g[0] + inverse_transpose[0][1] * g[1],
          inverse_transpose[1][0] * g[0] + inverse_transpose[1][1] * g[1]};
}

TriMesh TriMesh::structured_unit_square(std::size_t n) {
  if (n == 0) throw std::invalid_argument("structured mesh needs at least one cell per side");

  TriMesh mesh;
  mesh.n_ = n;
  const std::size_t np = n + 1;
  const double h = 1.0 / static_cast<double>(n);

  mesh.vertices_.reserve(np * np);
  mesh.boundary_vertex_.reserve(np * np);
  for (std::size_t j = 0; j < np; ++j) {
    for (std::size_t i = 0; i < np; ++i) {
      // i == n is written as exactly 1.0 so boundary tests can compare exactly.
      const double x = i == n ? 1.0 : static_cast<double>(i) * h;
      const double y = j == n ? 1.0 : static_cast<double>(j) * h;
      mesh.vertices_.push_back({x, y});
      mesh.boundary_vertex_.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  }

  const auto vid = [np](std::size_t i, std::size_t j) { return j * np + i; };
  mesh.triangles_.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      mesh.triangles_.push_back({a, b, c});
      mesh.triangles_.push_back({a, c, d});
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_ids;
  mesh.cell_edges_.resize(mesh.triangles_.size());
  for (std::size_t cell = 0; cell < mesh.triangles_.size(); ++cell) {
    const auto& tri = mesh.triangles_[cell];
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t va = tri[k], vb = tri[(k + 1) % 3];
      const auto key = std::minmax(va, vb);
      auto [it, inserted] = edge_ids.try_emplace({key.first, key.second}, mesh.edges_.size());
      if (inserted) {
        mesh.edges_.push_back({key.first, key.second});
        mesh.edge_cells_.push_back({cell, std::nullopt});
      } else {
        mesh.edge_cells_[it->second][1] = cell;
      }
      mesh.cell_edges_[cell][k] = it->second;
    }
  }

  mesh.boundary_side_.assign(mesh.edges_.size(), std::nullopt);
  for (std::size_t e = 0; e < mesh.edges_.size(); ++e) {
    if (mesh.edge_cells_[e][1].has_value()) continue;
    const Point& p = mesh.vertices_[mesh.edges_[e][0]];
    const Point& q = mesh.vertices_[mesh.edges_[e][1]];
    BoundarySide side;
    if (p.y == 0.0 && q.y == 0.0) {
      side = BoundarySide::bottom;
    } else if (p.x == 1.0 && q.x == 1.0) {
      side = BoundarySide::right;
    } else if (p.y == 1.0 && q.y == 1.0) {
      side = BoundarySide::top;
    } else {
      side = BoundarySide::left;
    }
    mesh.boundary_side_[e] = side;
    mesh.boundary_edges_.push_back({e, side});
  }
  return mesh;
}

AffineMap TriMesh::geometry(std::size_t cell) const {
  if (cell >= triangles_.size()) {
    throw std::out_of_range("cell index " + std::to_string(cell) + " out of range");
  }
  const auto& tri = triangles_[cell];
  AffineMap map;
  for (std::size_t k = 0; k < 3; ++k) map.vertices[k] = vertices_[tri[k]];
  const Point& v0 = map.vertices[0];
  const Point& v1 = map.vertices[1];
  const Point& v2 = map.vertices[2];
  map.jacobian = {{{v1.x - v0.x, v2.x - v0.x}, {v1.y - v0.y, v2.y - v0.y}}};
  const double det = map.jacobian[0][0] * map.jacobian[1][1] - map.jacobian[0][1] * map.jacobian[1][0];
  // J^{-T} = (1/det) [[ J11, -J10], [-J01, J00]]
  map.inverse_transpose = {{{map.jacobian[1][1] / det, -map.jacobian[1][0] / det},
                            {-map.jacobian[0][1] / det, map.jacobian[0][0] / det}}};
  map.det = std::abs(det);
  return map;
}

}  // namespace kvfem
