#pragma once

#include <Eigen/Core>
#include <memory>
#include <span>
#include <vector>

#include "svfem/mesh.hpp"
#include "svfem/quadrature.hpp"
#include "svfem/reference_element.hpp"
#include "svfem/types.hpp"

namespace svfem {

/// Which part of an enriched velocity u = (u^ct, u^R) to evaluate.
enum class Part { ct, R, s };

/// Contravariant Piola map of reference values: J v / det.
Eigen::MatrixX2d piola_values(const CellGeometry& g, const Eigen::MatrixX2d& ref);
/// Piola-mapped divergences: div / det.
Eigen::VectorXd piola_divergences(const CellGeometry& g, const Eigen::VectorXd& ref);

/// Reference bases tabulated on a fixed rule.
struct ReferenceTables {
  QuadRule rule;
  std::vector<Eigen::VectorXd> lag;
  std::vector<Eigen::MatrixX2d> lag_grad;
  std::vector<Eigen::MatrixX3d> lag_hess;
  std::vector<Eigen::MatrixX2d> enr;
  std::vector<Eigen::MatrixX4d> enr_grad;
  std::vector<Eigen::VectorXd> enr_div;
  std::vector<Eigen::VectorXd> pres;
};

/// Physical velocity basis of one cell at one point. Rows follow the local
/// velocity numbering: 2*a + component for Lagrange node a, then enrichment.
/// Columns of grad: (d1/dx, d1/dy, d2/dx, d2/dy).
struct VelocityBasis {
  Eigen::MatrixX2d value;
  Eigen::MatrixX4d grad;
  Eigen::MatrixX2d lap;  // piecewise Laplacian, zero on enrichment rows
  Eigen::VectorXd div;
};

/// Physical bases of one cell at all points of a reference table.
struct CellValues {
  int cell = -1;
  std::vector<double> jxw;
  std::vector<Vec2> x;
  std::vector<VelocityBasis> u;
  std::vector<Eigen::VectorXd> p;
};

/// Enriched Scott-Vogelius space V_ct x V_R x Q on a mesh: continuous vector
/// P_k, RT0 facet functions (k = 1) or complement bubbles of order k-1
/// (k >= 2), and discontinuous modal P_{k-1} pressure.
///
/// Global velocity numbering: ct dofs 2*node + component, then R dofs.
/// Velocity dofs on dirichlet facets and normal components on slip facets are
/// fixed to zero; periodic facets share nodes.
class FESpace {
 public:
  FESpace(const Mesh& mesh, int order);

  const Mesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  bool facet_enrichment() const { return order_ == 1; }
  const LagrangeElement& lagrange() const { return lagrange_; }
  const EnrichmentElement& enrichment() const { return enrichment_; }
  const PressureElement& pressure() const { return pressure_; }
  const CellGeometry& geometry(int c) const { return geometry_[c]; }

  int num_scalar_nodes() const { return n_nodes_; }
  int n_ct() const { return 2 * n_nodes_; }
  int n_R() const { return n_r_; }
  int n_u() const { return n_ct() + n_r_; }
  int n_p() const { return mesh_->num_cells() * pressure_.ndof(); }
  int local_velocity_dofs() const { return 2 * lagrange_.ndof() + enrichment_.ndof(); }
  int local_pressure_dofs() const { return pressure_.ndof(); }

  /// Global velocity indices of a cell; -1 marks an RT0 function on a
  /// boundary facet, which is not part of the space.
  std::span<const int> cell_velocity_dofs(int c) const;
  std::span<const double> cell_velocity_signs(int c) const;
  std::span<const int> cell_nodes(int c) const;
  int pressure_dof(int c, int i) const { return c * pressure_.ndof() + i; }

  bool is_fixed(int velocity_dof) const { return free_index_[velocity_dof] < 0; }
  /// Position among the free velocity dofs, -1 when fixed.
  int free_index(int velocity_dof) const { return free_index_[velocity_dof]; }
  std::span<const int> free_velocity_dofs() const { return free_dofs_; }
  int n_free() const { return static_cast<int>(free_dofs_.size()); }
  int n_ct_free() const { return n_ct_free_; }
  /// Integral of each pressure basis function (the zero-mean constraint row).
  const Eigen::VectorXd& pressure_means() const { return pressure_means_; }

  /// Nodal interpolation into V_ct, R part zero, fixed dofs zeroed.
  Vector interpolate(const VectorFunction& u, double t = 0.0) const;
  /// Sets fixed dofs to zero.
  void apply_constraints(Vector& u) const;

  ReferenceTables tabulate(const QuadRule& rule) const;
  void cell_values(int c, const ReferenceTables& tables, CellValues& out) const;
  VelocityBasis velocity_basis(int c, const Vec2& ref) const;
  Eigen::VectorXd pressure_basis(int c, const Vec2& ref) const;

  Vec2 evaluate(const Vector& u, int c, const Vec2& ref, Part part = Part::s) const;
  /// Gradient of the selected part (row i holds grad of component i).
  Mat2 evaluate_gradient(const Vector& u, int c, const Vec2& ref, Part part = Part::s) const;
  double evaluate_pressure(const Vector& p, int c, const Vec2& ref) const;

  /// Local coefficient vector of a cell (absent dofs zero). Orientation signs
  /// live in the basis rows, not here.
  Eigen::VectorXd gather(const Vector& u, int c) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int order_;
  LagrangeElement lagrange_;
  EnrichmentElement enrichment_;
  PressureElement pressure_;
  std::vector<CellGeometry> geometry_;
  int n_nodes_ = 0;
  int n_r_ = 0;
  int n_ct_free_ = 0;
  std::vector<int> nodes_;       // cells x lagrange ndof
  std::vector<int> vdofs_;       // cells x local velocity dofs
  std::vector<double> vsigns_;   // same layout
  std::vector<int> free_index_;  // n_u
  std::vector<int> free_dofs_;
  Eigen::VectorXd pressure_means_;
};

}  // namespace svfem
