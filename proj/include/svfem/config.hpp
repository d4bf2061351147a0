#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svfem/mesh.hpp"
#include "svfem/time_solver.hpp"

namespace svfem {

/// Where the mesh comes from. `example1` is the shipped level-0 grid of the
/// manufactured-flow example, `structured` a square grid, anything else a
/// path to a mesh file.
struct MeshSpec {
  std::string source = "example1";
  int n = 8;            // structured squares per side
  double extent = 1.0;  // side length of the structured square
  StructuredPattern pattern = StructuredPattern::crisscross_2x2;
  std::string boundary = "dirichlet";  // dirichlet | torus | shear_layer
  int level = 0;                       // uniform refinements applied on top
};

struct SimulationConfig {
  std::string preset = "custom";
  SchemeSpec scheme;
  int order = 2;
  MeshSpec mesh;

  // physics
  double nu = 1e-6;
  std::string forcing = "manufactured";  // manufactured | none
  std::string initial = "manufactured";  // manufactured | shear_layer | swirl | compact_vortex | zero
  InitialProjection projection = InitialProjection::leray;
  double gradient_force = 0.0;  // lambda in f + lambda grad(phi)
  double pressure_scale = 20.0;
  double delta0 = 1.0 / 28.0;
  double u_inf = 1.0;
  double c_n = 1e-3;

  // time
  double dt = 1e-3;
  double t_end = 0.1;

  // stabilization
  double alpha = 1.0;
  double gamma = 1.0;

  // output
  std::string out_dir = "out";
  int diagnostics_every = 1;
  int fields_every = 0;            // 0 disables periodic field dumps
  std::vector<double> dump_times;  // extra dumps at t / time_unit
  double time_unit = 1.0;          // delta0 for the shear layer
  unsigned seed = 1;
  bool desk_scale = true;

  /// Throws invalid_argument on inconsistent settings.
  void validate() const;
  int steps() const;
  PhysicalParameters physical() const { return {nu, alpha, gamma}; }
};

std::vector<std::string> preset_names();
/// example1, example1-robustness, kelvin-helmholtz or conservation-suite.
SimulationConfig preset(const std::string& name);

/// INI text with sections run, scheme, discretization, physics, time,
/// stabilization and output. Keys absent from the file keep the preset (or
/// default) values.
SimulationConfig read_config(std::istream& in);
SimulationConfig read_config_file(const std::string& path);
void write_config(std::ostream& out, const SimulationConfig& config);
void write_config_file(const std::string& path, const SimulationConfig& config);

bool operator==(const SimulationConfig& a, const SimulationConfig& b);

/// Builds the mesh of a spec, tagged and refined.
Mesh build_mesh(const MeshSpec& spec);

std::string to_string(StructuredPattern p);
StructuredPattern parse_pattern(const std::string& s);
std::string to_string(InitialProjection p);
InitialProjection parse_projection(const std::string& s);

}  // namespace svfem
