#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "svfem/fe_space.hpp"
#include "svfem/forms.hpp"

namespace svfem {

/// 1/2 int |u^s|^2.
double kinetic_energy(const FESpace& space, const Vector& u);

struct Momenta {
  Vec2 linear = Vec2::Zero();  // int u^s
  double angular = 0.0;        // int u1 y - u2 x
};
Momenta momenta(const FESpace& space, const Vector& u);

/// Curl of the continuous part, dx u2 - dy u1.
double curl_ct(const FESpace& space, const Vector& u, int cell, const Vec2& ref);
/// 1/2 ||curl u^ct||^2.
double enstrophy(const FESpace& space, const Vector& u);
/// Cell averages of curl u^ct.
Vector cell_vorticity(const FESpace& space, const Vector& u);

/// 2 u_inf / max_y |int curl u^ct dx| over the lines y = (1 + 2j) / 2048,
/// j = 1..1024, that lie inside the mesh. +infinity when the maximum is zero
/// (below 1e-12 u_inf).
double vorticity_thickness(const FESpace& space, const Vector& u, double u_inf = 1.0);
/// int curl u^ct dx along the horizontal line y.
double line_vorticity(const FESpace& space, const Vector& u, double y);

/// The line integrals behind vorticity_thickness as one sparse operator,
/// for repeated evaluation on a fixed space.
class ThicknessProbe {
 public:
  explicit ThicknessProbe(const FESpace& space);
  double operator()(const Vector& u, double u_inf = 1.0) const;
  const std::vector<double>& ordinates() const { return lines_; }
  Vector line_integrals(const Vector& u) const { return op_ * u; }

 private:
  std::vector<double> lines_;
  SparseMatrix op_;
};

/// ||div u^s||_L2.
double divergence_norm(const FESpace& space, const Vector& u);
/// ||grad u^ct||_L2.
double gradient_norm(const FESpace& space, const Vector& u);
/// ||div u^s|| / (1 + ||grad u^ct||), the mass conservation residual.
double mass_residual(const FESpace& space, const Vector& u);
/// Same, reusing the cell values cached in ctx.
double mass_residual(const FormContext& ctx, const Vector& u);
/// Cell averages of div u^s.
Vector cell_divergence(const FESpace& space, const Vector& u);
/// Cell averages of a pressure field.
Vector cell_pressure(const FESpace& space, const Vector& p);

/// ||u - u_h^s||_L2 at time t.
double l2_error(const FESpace& space, const Vector& u, const VectorFunction& exact, double t);
/// ||grad u - grad u_h^ct||_L2 at time t.
double h1_semi_error(const FESpace& space, const Vector& u, const GradientFunction& exact, double t);
/// ||h^{1/2} div u^R||^2.
double weighted_enrichment_divergence(const FESpace& space, const Vector& u);

enum class StarTerm { none, S1, S2, upwind };

/// Accumulates the error norms of a run: max over time levels of the L2
/// error of u^s and the star norm with trapezoidal time integration.
class ErrorAccumulator {
 public:
  ErrorAccumulator(const FESpace& space, VectorFunction exact, GradientFunction exact_grad, double nu, StarTerm term);

  void add(double t, const Vector& u);

  double linf_l2() const { return linf_; }
  double star_norm() const;

 private:
  double scheme_integrand(const Vector& u) const;

  const FESpace& space_;
  FormContext ctx_;
  VectorFunction exact_;
  GradientFunction grad_;
  double nu_;
  StarTerm term_;
  double linf_ = 0.0;
  double integral_ = 0.0;
  double final_r_ = 0.0;
  SparseMatrix s1_;
  double last_t_ = 0.0;
  double last_integrand_ = 0.0;
  bool started_ = false;
};

/// Scalar or small-vector series over strictly increasing times.
class TimeSeries {
 public:
  explicit TimeSeries(std::string label, std::vector<std::string> columns = {"value"});

  void push(double t, std::vector<double> values);
  void push(double t, double value) { push(t, std::vector<double>{value}); }

  const std::string& label() const { return label_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::vector<double>>& values() const { return values_; }
  std::size_t size() const { return times_.size(); }

  /// Header "t,<columns>", 17 significant digits.
  void write_csv(std::ostream& out) const;
  void write_csv_file(const std::string& path) const;

 private:
  std::string label_;
  std::vector<std::string> columns_;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;
};

}  // namespace svfem
