#pragma once

#include <Eigen/SparseCore>
#include <iosfwd>
#include <memory>

#include "svfem/fe_space.hpp"

namespace svfem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Integration degrees used by the assembly routines.
struct QuadratureDegrees {
  int bilinear = 4;
  int trilinear = 6;
  int face = 6;
  int rhs = 6;
  int error = 8;

  static QuadratureDegrees for_order(int k);
};

struct FormCache;

struct FormContext {
  explicit FormContext(const FESpace& s, Execution exec = Execution::parallel)
      : space(&s), degrees(QuadratureDegrees::for_order(s.order())), execution(exec) {}

  const FESpace* space;
  double alpha = 1.0;  // weight of the RT0 divergence term (k = 1)
  QuadratureDegrees degrees;
  Execution execution;
  /// Keeps mapped cell bases and the velocity sparsity pattern between
  /// assemblies. Worth it for repeated convection assembly; costs memory.
  void enable_cache();
  std::shared_ptr<FormCache> cache;
};

/// Physical bases of every cell at a triangle rule of the given degree,
/// kept in the context cache; null when the cache is off.
const std::vector<CellValues>* cached_cell_values(const FormContext& ctx, int degree);

/// Row/column block of an operator. Velocity operators split at n_ct; for
/// the divergence operator the rows are pressures (p*).
enum class Block { cc, cR, Rc, RR, pc, pR };

/// Compressed-row operator with block views. Rows are test functions,
/// columns trial functions.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(SparseMatrix m, int row_split, int col_split)
      : m_(std::move(m)), row_split_(row_split), col_split_(col_split) {}

  const SparseMatrix& matrix() const { return m_; }
  int rows() const { return static_cast<int>(m_.rows()); }
  int cols() const { return static_cast<int>(m_.cols()); }
  long nonzeros() const { return static_cast<long>(m_.nonZeros()); }
  SparseMatrix block(Block b) const;
  double max_abs() const;
  Vector apply(const Vector& x) const { return m_ * x; }
  double bilinear(const Vector& v, const Vector& u) const { return v.dot(m_ * u); }

  void write_matrix_market(std::ostream& out) const;
  void write_matrix_market_file(const std::string& path) const;

 private:
  SparseMatrix m_;
  int row_split_ = 0;
  int col_split_ = 0;
};

enum class Stabilization { S1, S2 };

/// (grad u_ct, grad v_ct) - (lap u_ct, v_R) + (lap v_ct, u_R) + a_D.
SparseOperator assemble_a_h(const FormContext& ctx);
/// alpha (div psi_F, div psi_F) on the diagonal for k = 1, zero otherwise.
SparseOperator assemble_a_h_D(const FormContext& ctx);
/// -(div v_s, q): pressure rows, velocity columns.
SparseOperator assemble_b(const FormContext& ctx);
/// (u_s, v_s).
SparseOperator assemble_d_h(const FormContext& ctx);
/// c(w, u_ct, v_s) - c(w, v_ct, u_R).
SparseOperator assemble_c_vol(const FormContext& ctx, const Vector& w);
/// c(w, u_s, v_s) - sum_F (w.n) [u_R] . {v_s}.
SparseOperator assemble_c_dG(const FormContext& ctx, const Vector& w);
/// 1/2 sum_F |w.n| [u_R] . [v_R].
SparseOperator assemble_c_uw(const FormContext& ctx, const Vector& w);
/// c_dG + c_uw in one pass over the faces.
SparseOperator assemble_c_dG_uw(const FormContext& ctx, const Vector& w);
/// c(w, u_R, v_R) - sum_F (w.n) [u_R] . {v_R}.
SparseOperator assemble_c_R(const FormContext& ctx, const Vector& w);
/// S1: (u_R, v_R); S2: (u_R / h, v_R).
SparseOperator assemble_S(const FormContext& ctx, Stabilization variant);
/// (f(t), v_s) for every velocity dof.
Vector assemble_rhs(const FormContext& ctx, const VectorFunction& f, double t);

}  // namespace svfem
