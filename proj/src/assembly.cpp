#include "kvfem/assembly.hpp"

#include <stdexcept>
#include <string>

namespace kvfem {

namespace {

struct TabulatedBasis {
  std::vector<P2BasisEval> at_points;
};

TabulatedBasis tabulate(const QuadratureRule& rule) {
  TabulatedBasis t;
  t.at_points.reserve(rule.points.size());
  for (const Point& p : rule.points) t.at_points.push_back(p2_basis_at(p));
  return t;
}

using LocalGradients = std::array<std::array<double, 2>, kP2NodesPerCell>;

LocalGradients physical_gradients(const AffineMap& map, const P2BasisEval& b) {
  LocalGradients g;
  for (std::size_t i = 0; i < kP2NodesPerCell; ++i) g[i] = map.physical_gradient(b.gradients[i]);
  return g;
}

// Scatter a scalar 6x6 block into both velocity components.
void scatter_vector_block(std::vector<Triplet>& out, const DofMap& dofs, std::size_t cell,
                          const std::array<std::array<double, 6>, 6>& local) {
  const auto& cd = dofs.cell_dofs(cell);
  for (std::size_t comp = 0; comp < 2; ++comp) {
    for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
      const int row = static_cast<int>(dofs.velocity_index(comp, cd[i]));
      for (std::size_t j = 0; j < kP2NodesPerCell; ++j) {
        out.push_back({row, static_cast<int>(dofs.velocity_index(comp, cd[j])), local[i][j]});
      }
    }
  }
}

}  // namespace

OperatorSet assemble_operators(const TriMesh& mesh, const DofMap& dofs, const QuadratureRule& rule) {
  const auto basis = tabulate(rule);
  const int nvel = static_cast<int>(dofs.n_velocity_dofs());
  const int npres = static_cast<int>(dofs.n_pressure_dofs());

  std::vector<Triplet> mass, stiff, div;
  const std::size_t per_cell = 2 * kP2NodesPerCell * kP2NodesPerCell;
  mass.reserve(mesh.n_cells() * per_cell);
  stiff.reserve(mesh.n_cells() * per_cell);
  div.reserve(mesh.n_cells() * 2 * kP2NodesPerCell);

  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    const AffineMap map = mesh.geometry(cell);
    std::array<std::array<double, 6>, 6> m{}, a{};
    std::array<std::array<double, 6>, 2> d{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * map.det;
      const auto& b = basis.at_points[q];
      const auto g = physical_gradients(map, b);
      for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
        for (std::size_t j = 0; j < kP2NodesPerCell; ++j) {
          m[i][j] += w * b.values[i] * b.values[j];
          a[i][j] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
        d[0][i] += w * g[i][0];
        d[1][i] += w * g[i][1];
      }
    }
    scatter_vector_block(mass, dofs, cell, m);
    scatter_vector_block(stiff, dofs, cell, a);
    const auto& cd = dofs.cell_dofs(cell);
    for (std::size_t comp = 0; comp < 2; ++comp) {
      for (std::size_t j = 0; j < kP2NodesPerCell; ++j) {
        div.push_back({static_cast<int>(cell), static_cast<int>(dofs.velocity_index(comp, cd[j])), d[comp][j]});
      }
    }
  }

  return {SparseMatrix::from_triplets(nvel, nvel, mass), SparseMatrix::from_triplets(nvel, nvel, stiff),
          SparseMatrix::from_triplets(npres, nvel, div)};
}

SparseMatrix assemble_convection(const TriMesh& mesh, const DofMap& dofs, std::span<const double> w,
                                 const QuadratureRule& rule) {
  const std::size_t nv = dofs.n_velocity_scalar_dofs();
  if (w.size() != 2 * nv) {
    throw std::invalid_argument("convection field has " + std::to_string(w.size()) + " coefficients, expected " +
                                std::to_string(2 * nv));
  }
  const auto basis = tabulate(rule);
  std::vector<Triplet> trips;
  trips.reserve(mesh.n_cells() * 2 * kP2NodesPerCell * kP2NodesPerCell);

  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    const AffineMap map = mesh.geometry(cell);
    const auto& cd = dofs.cell_dofs(cell);
    // adv[i][j] = integral of (w . grad psi_j) psi_i
    std::array<std::array<double, 6>, 6> adv{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double wt = rule.weights[q] * map.det;
      const auto& b = basis.at_points[q];
      const auto g = physical_gradients(map, b);
      double wx = 0.0, wy = 0.0;
      for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
        wx += w[cd[i]] * b.values[i];
        wy += w[nv + cd[i]] * b.values[i];
      }
      for (std::size_t j = 0; j < kP2NodesPerCell; ++j) {
        const double transport = wt * (wx * g[j][0] + wy * g[j][1]);
        for (std::size_t i = 0; i < kP2NodesPerCell; ++i) adv[i][j] += transport * b.values[i];
      }
    }
    std::array<std::array<double, 6>, 6> c{};
    for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
      for (std::size_t j = 0; j < kP2NodesPerCell; ++j) c[i][j] = 0.5 * (adv[i][j] - adv[j][i]);
    }
    scatter_vector_block(trips, dofs, cell, c);
  }
  const int nvel = static_cast<int>(2 * nv);
  return SparseMatrix::from_triplets(nvel, nvel, trips);
}

std::vector<double> assemble_load(const TriMesh& mesh, const DofMap& dofs, const std::function<Vec2(Point)>& f,
                                  const QuadratureRule& rule) {
  const std::size_t nv = dofs.n_velocity_scalar_dofs();
  const auto basis = tabulate(rule);
  std::vector<double> load(2 * nv, 0.0);
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    const AffineMap map = mesh.geometry(cell);
    const auto& cd = dofs.cell_dofs(cell);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double wt = rule.weights[q] * map.det;
      const Vec2 fq = f(map.to_physical(rule.points[q]));
      const auto& b = basis.at_points[q];
      for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
        load[cd[i]] += wt * fq.x * b.values[i];
        load[nv + cd[i]] += wt * fq.y * b.values[i];
      }
    }
  }
  return load;
}

DirichletData velocity_dirichlet_data(const DofMap& dofs, const std::function<Vec2(Point)>& g) {
  DirichletData bc;
  const auto& boundary = dofs.dirichlet_dofs();
  bc.indices.reserve(2 * boundary.size());
  bc.values.reserve(2 * boundary.size());
  std::vector<Vec2> sampled;
  sampled.reserve(boundary.size());
  for (std::size_t d : boundary) sampled.push_back(g(dofs.node(d)));
  for (std::size_t comp = 0; comp < 2; ++comp) {
    for (std::size_t k = 0; k < boundary.size(); ++k) {
      bc.indices.push_back(static_cast<int>(dofs.velocity_index(comp, boundary[k])));
      bc.values.push_back(comp == 0 ? sampled[k].x : sampled[k].y);
    }
  }
  return bc;
}

void apply_dirichlet(SparseMatrix& system, std::span<double> rhs, const DirichletData& bc) {
  const int n = system.rows();
  if (static_cast<int>(rhs.size()) != n) throw std::invalid_argument("right-hand side does not match the system");
  if (bc.indices.size() != bc.values.size()) throw std::invalid_argument("Dirichlet indices and values differ in length");

  std::vector<char> constrained(system.cols(), 0);
  std::vector<double> prescribed(system.cols(), 0.0);
  for (std::size_t k = 0; k < bc.indices.size(); ++k) {
    const int idx = bc.indices[k];
    if (idx < 0 || idx >= n) throw std::out_of_range("Dirichlet index " + std::to_string(idx) + " out of range");
    constrained[idx] = 1;
    prescribed[idx] = bc.values[k];
  }

  const auto offsets = system.row_offsets();
  const auto cols = system.col_indices();
  auto vals = system.values();
  for (int r = 0; r < n; ++r) {
    if (constrained[r]) {
      bool has_diagonal = false;
      for (int p = offsets[r]; p < offsets[r + 1]; ++p) {
        if (cols[p] == r) {
          vals[p] = 1.0;
          has_diagonal = true;
        } else {
          vals[p] = 0.0;
        }
      }
      if (!has_diagonal) {
        throw std::invalid_argument("constrained row " + std::to_string(r) + " has no diagonal entry");
      }
      rhs[r] = prescribed[r];
      continue;
    }
    for (int p = offsets[r]; p < offsets[r + 1]; ++p) {
      if (constrained[cols[p]]) {
        rhs[r] -= vals[p] * prescribed[cols[p]];
        vals[p] = 0.0;
      }
    }
  }
}

}  // namespace kvfem
