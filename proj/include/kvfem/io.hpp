#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "kvfem/analysis.hpp"
#include "kvfem/fem_space.hpp"
#include "kvfem/mesh.hpp"

namespace kvfem {

/// Velocity and pressure at one time, viewed against their mesh.
struct FieldSnapshot {
  const TriMesh& mesh;
  const DofMap& dofs;
  std::span<const double> velocity;  // blocked P2 coefficients
  std::span<const double> pressure;  // one value per cell
  double time = 0.0;
};

/// ASCII legacy VTK unstructured grid. Each triangle is drawn as four
/// linear subtriangles on its P2 nodes, so points are the scalar velocity
/// dofs in dof order and cell k of triangle c is 4c + k.
void write_vtk_legacy(const FieldSnapshot& snapshot, const std::filesystem::path& path);

/// Contents of a legacy VTK file as written above.
struct VtkData {
  std::vector<Point> points;
  std::vector<std::array<std::size_t, 3>> cells;
  std::vector<Vec2> velocity;
  std::vector<double> pressure;
};

/// Minimal reader for files produced by write_vtk_legacy.
VtkData read_vtk_legacy(const std::filesystem::path& path);

/// Columns h,err_k<kappa>,rate_k<kappa>,... for each table in order. The
/// first row's rate cells are empty. Throws std::invalid_argument when the
/// tables do not share the same meshes.
void write_rate_table_csv(std::span<const std::pair<double, RateTable>> tables, const std::filesystem::path& path);

/// Columns t,kinetic,gradient.
void write_energy_csv(std::span<const EnergySample> series, const std::filesystem::path& path);

struct GapSample {
  double kappa = 0.0;
  double gap = 0.0;
};

/// Columns kappa,gap.
void write_gap_csv(std::span<const GapSample> gaps, const std::filesystem::path& path);

/// Compact decimal form of a parameter value ("1", "0.001", "1e-06").
std::string format_parameter(double value);

}  // namespace kvfem
