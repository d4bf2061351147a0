#include "svfem/vtk.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include "svfem/diagnostics.hpp"
#include "svfem/error.hpp"

namespace svfem {

void write_vtk(std::ostream& out, const FESpace& s, const Vector& u, const Vector& p, const std::string& title) {
  const Mesh& m = s.mesh();
  const int nv = m.num_vertices(), nc = m.num_cells();
  // vertex values from any adjacent cell, u^ct is continuous
  std::vector<Vec2> vel(nv, Vec2::Zero());
  const Vec2 corners[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  for (int c = 0; c < nc; ++c) {
    for (int i = 0; i < 3; ++i) vel[m.cell(c)[i]] = s.evaluate(u, c, corners[i], Part::ct);
  }
  const Vector vort = cell_vorticity(s, u);
  const Vector pres = cell_pressure(s, p);
  const Vector div = cell_divergence(s, u);

  out << "# vtk DataFile Version 3.0\n" << title.substr(0, 255) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(17);
  out << "POINTS " << nv << " double\n";
  for (const Vec2& x : m.vertices()) out << x(0) << " " << x(1) << " 0\n";
  out << "CELLS " << nc << " " << 4 * nc << "\n";
  for (const auto& cell : m.cells()) out << "3 " << cell[0] << " " << cell[1] << " " << cell[2] << "\n";
  out << "CELL_TYPES " << nc << "\n";
  for (int c = 0; c < nc; ++c) out << "5\n";
  out << "POINT_DATA " << nv << "\nVECTORS velocity double\n";
  for (const Vec2& v : vel) out << v(0) << " " << v(1) << " 0\n";
  out << "CELL_DATA " << nc << "\n";
  auto scalar = [&](const char* name, const Vector& f) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < nc; ++c) out << f(c) << "\n";
  };
  scalar("vorticity", vort);
  scalar("pressure", pres);
  scalar("divergence", div);
}

void write_vtk_file(const std::string& path, const FESpace& space, const Vector& u, const Vector& p,
                    const std::string& title) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  write_vtk(out, space, u, p, title);
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path);
}

}  // namespace svfem
