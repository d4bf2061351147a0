#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "svfem/config.hpp"
#include "svfem/diagnostics.hpp"
#include "svfem/time_solver.hpp"

namespace svfem {

/// Mesh, space and solver of a configuration, with its data callables.
class Simulation {
 public:
  explicit Simulation(const SimulationConfig& config, Execution execution = Execution::parallel);

  const SimulationConfig& config() const { return config_; }
  const Mesh& mesh() const { return mesh_; }
  const FESpace& space() const { return space_; }
  FlowSolver& solver() { return solver_; }

  /// Right-hand side including the gradient force, empty for f = 0.
  VectorFunction forcing() const;
  VectorFunction initial_velocity() const;
  /// Exact velocity and gradient, empty unless the flow is manufactured.
  VectorFunction exact_velocity() const;
  GradientFunction exact_gradient() const;
  FlowState initial_state();

 private:
  SimulationConfig config_;
  Mesh mesh_;
  FESpace space_;
  FlowSolver solver_;
};

struct RunOptions {
  bool write_files = false;
  /// Called after every step; returning false stops the run.
  std::function<bool(const FlowState&)> on_step;
};

struct RunResult {
  FlowState final_state;
  /// energy, enstrophy, vorticity_thickness, mass_residual, momentum_x,
  /// momentum_y, angular_momentum at every diagnostics step.
  TimeSeries diagnostics{"diagnostics", {"energy", "enstrophy", "vorticity_thickness", "mass_residual",
                                         "momentum_x", "momentum_y", "angular_momentum"}};
  /// Kinetic energy after every step.
  TimeSeries energy{"energy", {"energy"}};
  double linf_l2 = std::numeric_limits<double>::quiet_NaN();
  double star_norm = std::numeric_limits<double>::quiet_NaN();
  double max_mass_residual = 0.0;
  /// Largest E(n+1) - E(n) over the run.
  double max_energy_increase = -std::numeric_limits<double>::infinity();
  int steps = 0;
  int picard_iterations = 0;
  int factorizations = 0;
  int n_u = 0, n_p = 0, system_u = 0, system_p = 0;
  double seconds = 0.0;
  std::vector<std::string> files;
};

/// Runs a configuration from its initial state to t_end.
RunResult run_simulation(const SimulationConfig& config, const RunOptions& options = {},
                         Execution execution = Execution::parallel);

struct ConvergenceRow {
  int level = 0;
  int cells = 0;
  double h = 0.0;
  int n_u = 0, n_p = 0;
  double linf_l2 = 0.0, star_norm = 0.0;
  double rate_l2 = std::numeric_limits<double>::quiet_NaN();
  double rate_star = std::numeric_limits<double>::quiet_NaN();
  double max_mass_residual = 0.0;
  double seconds = 0.0;
};

/// Levels config.mesh.level .. config.mesh.level + levels - 1.
std::vector<ConvergenceRow> run_convergence(const SimulationConfig& config, int levels,
                                            std::ostream* progress = nullptr);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

struct RobustnessRow {
  double nu = 0.0;
  double lambda = 0.0;
  double linf_l2 = 0.0, star_norm = 0.0;
  /// ||u(lambda) - u(0)|| / ||u(0)|| at the final time.
  double velocity_change = 0.0;
  double max_mass_residual = 0.0;
  int max_picard = 0;
};

/// For each nu runs the configuration without and with the gradient force
/// lambda grad(phi).
std::vector<RobustnessRow> run_robustness(const SimulationConfig& config, const std::vector<double>& nus,
                                          double lambda, std::ostream* progress = nullptr);
void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows);

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Form identities, skew-symmetry, energy and momentum batteries.
std::vector<CheckResult> run_conservation_suite(const SimulationConfig& config, unsigned seed,
                                                std::ostream* progress = nullptr);
void write_checks_csv(std::ostream& out, const std::vector<CheckResult>& checks);

/// max |C_dG - C_vol - C_R| / max |C_dG| over random discretely
/// divergence-free convecting fields (the identity needs div w = 0).
double form_identity_residual(FlowSolver& solver, int samples, unsigned seed);
/// max |v^T C_vol(w) v| / (|v|^T |C_vol(w)| |v|) for discretely
/// divergence-free random w and random v.
double skew_residual(FlowSolver& solver, int samples, unsigned seed);
/// Random discretely divergence-free field (Leray projection of a random vector).
Vector random_divergence_free(FlowSolver& solver, std::mt19937& rng);
/// max over cells and random bubble fields of ||v|| / (h ||div v||).
double bubble_divergence_constant(const FESpace& space, int samples, unsigned seed);

/// JSON manifest with the resolved configuration, git revision and results.
void write_manifest(const std::string& path, const SimulationConfig& config, const std::string& command,
                    const std::vector<std::pair<std::string, double>>& results = {});
std::string git_revision();

}  // namespace svfem
