#include "kvfem/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kvfem {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Shortest %g form that reads back to the same double.
std::string exact(double v) {
  for (int prec = 6; prec <= 17; ++prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return fmt("%.17g", v);
}

}  // namespace

std::string format_parameter(double value) { return exact(value); }

void write_vtk_legacy(const FieldSnapshot& snap, const std::filesystem::path& path) {
  const std::size_t nv = snap.dofs.n_velocity_scalar_dofs();
  if (snap.velocity.size() != 2 * nv || snap.pressure.size() != snap.mesh.n_cells()) {
    throw std::invalid_argument("snapshot arrays do not match the dof map");
  }
  std::ofstream out = open_for_write(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "kelvin-voigt fields t=" << exact(snap.time) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const Point& p : snap.dofs.nodes()) out << exact(p.x) << ' ' << exact(p.y) << " 0\n";

  const std::size_t ncells = 4 * snap.mesh.n_cells();
  out << "CELLS " << ncells << ' ' << 4 * ncells << "\n";
  for (std::size_t c = 0; c < snap.mesh.n_cells(); ++c) {
    const auto& d = snap.dofs.cell_dofs(c);
    // corners v0 v1 v2, midpoints m01 = d[3], m12 = d[4], m20 = d[5]
    out << "3 " << d[0] << ' ' << d[3] << ' ' << d[5] << "\n";
    out << "3 " << d[3] << ' ' << d[1] << ' ' << d[4] << "\n";
    out << "3 " << d[5] << ' ' << d[4] << ' ' << d[2] << "\n";
    out << "3 " << d[3] << ' ' << d[4] << ' ' << d[5] << "\n";
  }
  out << "CELL_TYPES " << ncells << "\n";
  for (std::size_t c = 0; c < ncells; ++c) out << "5\n";

  out << "POINT_DATA " << nv << "\nVECTORS velocity double\n";
  for (std::size_t d = 0; d < nv; ++d) out << exact(snap.velocity[d]) << ' ' << exact(snap.velocity[nv + d]) << " 0\n";

  out << "CELL_DATA " << ncells << "\nSCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (std::size_t c = 0; c < snap.mesh.n_cells(); ++c) {
    const std::string p = exact(snap.pressure[c]);
    for (int k = 0; k < 4; ++k) out << p << "\n";
  }
  finish(out, path);
}

VtkData read_vtk_legacy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  VtkData data;
  std::string token;
  const auto expect_count = [&](std::size_t& count) {
    if (!(in >> count)) throw std::runtime_error("malformed VTK header in '" + path.string() + "'");
  };
  while (in >> token) {
    if (token == "POINTS") {
      std::size_t n;
      expect_count(n);
      in >> token;
      data.points.resize(n);
      double z;
      for (auto& p : data.points) in >> p.x >> p.y >> z;
    } else if (token == "CELLS") {
      std::size_t n, total;
      expect_count(n);
      expect_count(total);
      data.cells.resize(n);
      std::size_t arity;
      for (auto& c : data.cells) {
        in >> arity;
        if (arity != 3) throw std::runtime_error("only triangle cells are supported");
        in >> c[0] >> c[1] >> c[2];
      }
    } else if (token == "VECTORS") {
      in >> token >> token;
      data.velocity.resize(data.points.size());
      double z;
      for (auto& v : data.velocity) in >> v.x >> v.y >> z;
    } else if (token == "SCALARS") {
      in >> token >> token;
      std::string maybe_components;
      in >> maybe_components;
      if (maybe_components == "LOOKUP_TABLE") {
        in >> token;
      } else {
        in >> token >> token;
      }
      data.pressure.resize(data.cells.size());
      for (double& p : data.pressure) in >> p;
    }
    if (!in && !in.eof()) throw std::runtime_error("malformed VTK body in '" + path.string() + "'");
  }
  return data;
}

void write_rate_table_csv(std::span<const std::pair<double, RateTable>> tables, const std::filesystem::path& path) {
  if (tables.empty()) throw std::invalid_argument("no rate tables to write");
  const RateTable& first = tables.front().second;
  for (const auto& [kappa, table] : tables) {
    if (table.size() != first.size()) throw std::invalid_argument("rate tables have different mesh lists");
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table[i].cells_per_side != first[i].cells_per_side) {
        throw std::invalid_argument("rate tables have different mesh lists");
      }
    }
  }

  std::ofstream out = open_for_write(path);
  out << "h";
  for (const auto& entry : tables) {
    const std::string k = format_parameter(entry.first);
    out << ",err_k" << k << ",rate_k" << k;
  }
  out << "\n";
  for (std::size_t i = 0; i < first.size(); ++i) {
    out << "1/" << first[i].cells_per_side;
    for (const auto& entry : tables) {
      const RateRow& row = entry.second[i];
      out << ',';
      if (std::isfinite(row.error)) out << fmt("%.6e", row.error);
      out << ',';
      if (row.rate) out << fmt("%.6f", *row.rate);
    }
    out << "\n";
  }
  finish(out, path);
}

void write_energy_csv(std::span<const EnergySample> series, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  out << "t,kinetic,gradient\n";
  for (const auto& s : series) out << exact(s.t) << ',' << fmt("%.12e", s.kinetic) << ',' << fmt("%.12e", s.gradient) << "\n";
  finish(out, path);
}

void write_gap_csv(std::span<const GapSample> gaps, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  out << "kappa,gap\n";
  for (const auto& g : gaps) out << format_parameter(g.kappa) << ',' << fmt("%.12e", g.gap) << "\n";
  finish(out, path);
}

}  // namespace kvfem
