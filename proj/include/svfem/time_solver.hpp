#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "svfem/fe_space.hpp"
#include "svfem/forms.hpp"
#include "svfem/linear_solver.hpp"

namespace svfem {

enum class SchemeVariant { upwind_dg, vol_S1, vol_S2 };
enum class TimeIntegrator { backward_euler, crank_nicolson };
/// picard_implicit iterates with the previous iterate as convecting field;
/// linearized does a single solve with the extrapolated field; explicit_rhs
/// moves c(w*, w*, v) to the right-hand side; none drops convection.
enum class ConvectionTreatment { picard_implicit, linearized, explicit_rhs, none };
enum class InitialProjection { leray, interpolate };

std::string to_string(SchemeVariant v);
std::string to_string(TimeIntegrator v);
std::string to_string(ConvectionTreatment v);
SchemeVariant parse_scheme_variant(const std::string& s);
TimeIntegrator parse_time_integrator(const std::string& s);
ConvectionTreatment parse_convection(const std::string& s);

struct SchemeSpec {
  SchemeVariant variant = SchemeVariant::vol_S2;
  TimeIntegrator integrator = TimeIntegrator::crank_nicolson;
  ConvectionTreatment convection = ConvectionTreatment::picard_implicit;
  double picard_tol = 1e-8;
  int picard_max = 20;
  bool reduced = false;
  /// Solve the convective systems by defect correction against the factored
  /// convection-free matrix (one factorization per dt). Falls back to a
  /// direct factorization when the correction does not contract.
  bool frozen_factorization = false;
  /// Quadrature degree of the load vector, 0 keeps the default 2k + 2.
  int rhs_degree = 0;
};

struct PhysicalParameters {
  double nu = 1.0;
  double alpha = 1.0;
  double gamma = 1.0;
};

struct FlowState {
  double t = 0.0;
  int step = 0;
  Vector u;       // enriched velocity (ct then R)
  Vector p;       // pressure
  Vector u_prev;  // previous velocity, empty before the first step
};

struct StepReport {
  int picard_iterations = 0;
  double increment = 0.0;
};

/// Time stepping for the enriched Scott-Vogelius discretisation.
class FlowSolver {
 public:
  using SolverFactory = std::function<std::unique_ptr<LinearSolver>()>;

  FlowSolver(const FESpace& space, PhysicalParameters phys, SchemeSpec scheme,
             Execution execution = Execution::parallel, SolverFactory factory = make_default_solver);
  ~FlowSolver();

  const FESpace& space() const { return space_; }
  const FormContext& context() const { return ctx_; }
  const PhysicalParameters& parameters() const { return phys_; }
  const SchemeSpec& scheme() const { return scheme_; }

  /// nu a_h(u, v) + b(v, p) = (f, v), b(u, q) = 0.
  FlowState solve_stokes(const VectorFunction& f, double t = 0.0);
  /// Interpolation into V_ct, optionally followed by the d_h projection onto
  /// the discretely divergence-free subspace.
  FlowState set_initial(const VectorFunction& u0, InitialProjection mode = InitialProjection::leray,
                        double t0 = 0.0);
  /// d_h projection of a coefficient vector onto the discretely
  /// divergence-free subspace.
  Vector project(const Vector& u);
  /// Advances by dt. Throws step_failure when Picard does not converge.
  StepReport step(FlowState& state, double dt, const VectorFunction& f);

  /// R with U_R = -R U_ct on bubble-enriched spaces (k >= 2), n_R x n_ct.
  const SparseMatrix& reconstruction() const;
  /// Unknowns of the linear systems actually solved (velocity, pressure).
  int system_velocity_dofs() const { return static_cast<int>(trial_.cols()); }
  int system_pressure_dofs() const { return static_cast<int>(constraint_.rows()); }

  const SparseOperator& mass() const { return mass_; }
  const SparseOperator& laplace() const { return a_; }
  const SparseOperator& divergence() const { return b_; }
  /// gamma-weighted stabilization of the variant (empty for upwind_dg).
  const SparseMatrix& stabilization() const { return stab_; }
  /// Convection operator of the selected variant for a convecting field.
  SparseMatrix convection(const Vector& w) const;
  /// sqrt(v^T (d_h + a_h) v), the increment norm of the Picard loop.
  double h1_norm(const Vector& v) const;

  int factorizations() const;
  int defect_iterations() const { return defect_iterations_; }

 private:
  struct System;
  void build_reduction();
  std::unique_ptr<System> make_system(const SparseMatrix& k0) const;
  /// Solves (k0 + extra) u + B^T p = rhs, B u = 0 on the constrained space.
  void solve(System& sys, const Vector& rhs, const SparseMatrix* extra, Vector& u, Vector& p);
  /// Full pressure from the P0 part and the bubble rows of rhs - K u.
  Vector recover_pressure(const Vector& ku, const Vector& rhs, const Vector& p0) const;
  System& step_system(double dt);

  const FESpace& space_;
  FormContext ctx_;
  PhysicalParameters phys_;
  SchemeSpec scheme_;
  SolverFactory factory_;
  SparseOperator mass_, a_, b_;
  SparseMatrix stab_;        // gamma S1 or gamma S2
  SparseMatrix time_mass_;   // d_h (+ gamma S1)
  SparseMatrix viscous_;     // nu a_h (+ gamma S2)
  SparseMatrix recon_;       // n_R x n_ct
  SparseMatrix trial_;       // n_u x n_sys, free velocity or [I; -R] on free ct dofs
  SparseMatrix constraint_;  // divergence rows times trial_
  Vector means_;
  int pin_ = 0;
  std::vector<Eigen::MatrixXd> local_div_;  // per cell bubble block of b on zero-mean modes
  std::unique_ptr<System> step_;
  std::unique_ptr<System> leray_;
  std::unique_ptr<LinearSolver> direct_;
  int defect_iterations_ = 0;
  int extra_factorizations_ = 0;
};

/// Binary checkpoint: magic, version, t, n_ct, n_R, n_p, then U_ct, U_R, P.
void write_checkpoint(const std::string& path, const FESpace& space, const FlowState& state);
FlowState read_checkpoint(const std::string& path, const FESpace& space);

}  // namespace svfem
