#pragma once

#include <Eigen/SparseCore>
#include <memory>
#include <string>

#include "svfem/types.hpp"

namespace svfem {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Direct solver backend. The symbolic analysis is kept while the sparsity
/// pattern of consecutive matrices is unchanged.
class LinearSolver {
 public:
  virtual ~LinearSolver() = default;
  virtual void factorize(const ColMatrix& a) = 0;
  virtual Vector solve(const Vector& b) const = 0;
  virtual std::string name() const = 0;

  int symbolic_analyses() const { return analyses_; }
  int numeric_factorizations() const { return factorizations_; }

 protected:
  int analyses_ = 0;
  int factorizations_ = 0;
};

/// Supernodal sparse LU with COLAMD ordering.
std::unique_ptr<LinearSolver> make_sparse_lu();
/// UMFPACK multifrontal LU; throws when the build has no UMFPACK.
std::unique_ptr<LinearSolver> make_umfpack();
bool have_umfpack();
/// UMFPACK when available, the sparse LU otherwise.
std::unique_ptr<LinearSolver> make_default_solver();

}  // namespace svfem
