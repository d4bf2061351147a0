#include "svfem/linear_solver.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#ifdef SVFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <algorithm>
#include <vector>

#include "svfem/error.hpp"

namespace svfem {

namespace {

class SparseLUSolver final : public LinearSolver {
 public:
  void factorize(const ColMatrix& a) override {
    ColMatrix m = a;
    m.makeCompressed();
    if (!same_pattern(m)) {
      lu_.analyzePattern(m);
      ++analyses_;
      outer_.assign(m.outerIndexPtr(), m.outerIndexPtr() + m.outerSize() + 1);
      inner_.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
    }
    lu_.factorize(m);
    ++factorizations_;
    if (lu_.info() != Eigen::Success) {
      throw Error(ErrorCode::solver_failure, "sparse LU failed on a " + std::to_string(m.rows()) + " system: " +
                                                 lu_.lastErrorMessage());
    }
  }

  Vector solve(const Vector& b) const override {
    Vector x = lu_.solve(b);
    if (!x.allFinite()) throw Error(ErrorCode::solver_failure, "non-finite solution");
    return x;
  }

  std::string name() const override { return "eigen-sparselu-colamd"; }

 private:
  bool same_pattern(const ColMatrix& m) const {
    if (outer_.size() != static_cast<std::size_t>(m.outerSize() + 1)) return false;
    if (inner_.size() != static_cast<std::size_t>(m.nonZeros())) return false;
    return std::equal(outer_.begin(), outer_.end(), m.outerIndexPtr()) &&
           std::equal(inner_.begin(), inner_.end(), m.innerIndexPtr());
  }

  mutable Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<int> outer_, inner_;
};

#ifdef SVFEM_HAVE_UMFPACK
class UmfpackSolver final : public LinearSolver {
 public:
  // callers refine against their own operator
  UmfpackSolver() { lu_.umfpackControl()(UMFPACK_IRSTEP) = 0; }

  void factorize(const ColMatrix& a) override {
    // the solve phase reads the matrix again, so it must outlive factorize()
    m_ = a;
    m_.makeCompressed();
    const ColMatrix& m = m_;
    if (!same_pattern(m)) {
      lu_.analyzePattern(m);
      ++analyses_;
      outer_.assign(m.outerIndexPtr(), m.outerIndexPtr() + m.outerSize() + 1);
      inner_.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
    }
    lu_.factorize(m);
    ++factorizations_;
    if (lu_.info() != Eigen::Success) {
      throw Error(ErrorCode::solver_failure, "UMFPACK failed on a " + std::to_string(m.rows()) + " system");
    }
  }

  Vector solve(const Vector& b) const override {
    Vector x = lu_.solve(b);
    if (!x.allFinite()) throw Error(ErrorCode::solver_failure, "non-finite solution");
    return x;
  }

  std::string name() const override { return "umfpack"; }

 private:
  bool same_pattern(const ColMatrix& m) const {
    if (outer_.size() != static_cast<std::size_t>(m.outerSize() + 1)) return false;
    if (inner_.size() != static_cast<std::size_t>(m.nonZeros())) return false;
    return std::equal(outer_.begin(), outer_.end(), m.outerIndexPtr()) &&
           std::equal(inner_.begin(), inner_.end(), m.innerIndexPtr());
  }

  ColMatrix m_;
  Eigen::UmfPackLU<ColMatrix> lu_;
  std::vector<int> outer_, inner_;
};
#endif

}  // namespace

std::unique_ptr<LinearSolver> make_sparse_lu() { return std::make_unique<SparseLUSolver>(); }

std::unique_ptr<LinearSolver> make_umfpack() {
#ifdef SVFEM_HAVE_UMFPACK
  return std::make_unique<UmfpackSolver>();
#else
  throw Error(ErrorCode::invalid_argument, "built without UMFPACK");
#endif
}

bool have_umfpack() {
#ifdef SVFEM_HAVE_UMFPACK
  return true;
#else
  return false;
#endif
}

std::unique_ptr<LinearSolver> make_default_solver() { return have_umfpack() ? make_umfpack() : make_sparse_lu(); }

}  // namespace svfem
