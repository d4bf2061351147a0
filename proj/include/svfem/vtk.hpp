#pragma once

#include <iosfwd>
#include <string>

#include "svfem/fe_space.hpp"

namespace svfem {

/// Legacy ASCII VTK unstructured grid: u^ct at the mesh vertices as point
/// data; vorticity, pressure average and div u^s as cell data.
void write_vtk(std::ostream& out, const FESpace& space, const Vector& u, const Vector& p,
               const std::string& title = "svfem");
void write_vtk_file(const std::string& path, const FESpace& space, const Vector& u, const Vector& p,
                    const std::string& title = "svfem");

}  // namespace svfem
