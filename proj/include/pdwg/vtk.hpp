#pragma once

// Legacy ASCII VTK output of per-tet fields.

#include "pdwg/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pdwg {

struct VtkCellData {
  std::vector<std::pair<std::string, const std::vector<double>*>> scalars;
  std::vector<std::pair<std::string, const std::vector<Vec3>*>> vectors;
};

inline void write_vtk(const std::string& path, const Mesh& mesh, const VtkCellData& data,
                      const std::string& title = "pdwg") {
  for (const auto& [name, v] : data.scalars)
    if (static_cast<Index>(v->size()) != mesh.num_tets())
      throw std::invalid_argument("write_vtk: scalar field '" + name + "' has wrong length");
  for (const auto& [name, v] : data.vectors)
    if (static_cast<Index>(v->size()) != mesh.num_tets())
      throw std::invalid_argument("write_vtk: vector field '" + name + "' has wrong length");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_vtk: cannot open " + path);
  os << std::setprecision(12);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices) os << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  os << "CELLS " << mesh.num_tets() << ' ' << 5 * mesh.num_tets() << '\n';
  for (const auto& t : mesh.tets) os << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  os << "CELL_TYPES " << mesh.num_tets() << '\n';
  for (Index t = 0; t < mesh.num_tets(); ++t) os << "10\n";
  os << "CELL_DATA " << mesh.num_tets() << '\n';
  for (const auto& [name, v] : data.scalars) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : *v) os << x << '\n';
  }
  for (const auto& [name, v] : data.vectors) {
    os << "VECTORS " << name << " double\n";
    for (const auto& x : *v) os << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  }
  if (!os) throw std::runtime_error("write_vtk: write failed for " + path);
}

}  // namespace pdwg
