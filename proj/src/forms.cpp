#include "svfem/forms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <span>

#include "svfem/error.hpp"

namespace svfem {

QuadratureDegrees QuadratureDegrees::for_order(int k) {
  QuadratureDegrees d;
  d.bilinear = 2 * k;
  d.trilinear = 3 * k;
  d.face = 3 * k;
  d.rhs = 2 * k + 2;
  d.error = 2 * k + 4;
  return d;
}

SparseMatrix SparseOperator::block(Block b) const {
  const int r0 = (b == Block::Rc || b == Block::RR) ? row_split_ : 0;
  const int r1 = (b == Block::cc || b == Block::cR) ? row_split_ : rows();
  const int c0 = (b == Block::cR || b == Block::RR || b == Block::pR) ? col_split_ : 0;
  const int c1 = (b == Block::cc || b == Block::Rc || b == Block::pc) ? col_split_ : cols();
  return m_.block(r0, c0, r1 - r0, c1 - c0);
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (int k = 0; k < m_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m_, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

void SparseOperator::write_matrix_market(std::ostream& out) const {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << rows() << " " << cols() << " " << nonzeros() << "\n";
  out << std::setprecision(17);
  for (int k = 0; k < m_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m_, k); it; ++it) {
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
    }
  }
}

void SparseOperator::write_matrix_market_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  write_matrix_market(out);
}

namespace {

enum class Field { velocity, pressure };

std::vector<int> cell_dofs(const FESpace& s, int c, Field f) {
  if (f == Field::velocity) {
    const auto d = s.cell_velocity_dofs(c);
    return {d.begin(), d.end()};
  }
  std::vector<int> d(s.local_pressure_dofs());
  for (int i = 0; i < s.local_pressure_dofs(); ++i) d[i] = s.pressure_dof(c, i);
  return d;
}

int field_size(const FESpace& s, Field f) { return f == Field::velocity ? s.n_u() : s.n_p(); }

bool parallel(const FormContext& ctx) { return ctx.execution == Execution::parallel; }

void scatter(std::vector<Eigen::Triplet<double>>& trip, const std::vector<int>& rows, const std::vector<int>& cols,
             const Eigen::MatrixXd& local) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0) continue;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j] < 0) continue;
      trip.emplace_back(rows[i], cols[j], local(i, j));
    }
  }
}

}  // namespace

struct FaceValues {
  std::vector<Eigen::MatrixX2d> minus, plus;  // basis values at the edge points
  std::vector<double> jxw;
  Vec2 normal;
};

struct FormCache {
  std::vector<std::pair<int, std::vector<CellValues>>> values;  // by degree
  SparseMatrix pattern;                                         // velocity x velocity, cell couplings
  std::vector<std::vector<int>> slots;                          // per cell, n x n positions in pattern
  std::vector<FaceValues> faces;
  SparseMatrix face_pattern;
  std::vector<std::vector<int>> face_slots;  // per face, 2n x 2n
};

void FormContext::enable_cache() {
  if (!cache) cache = std::make_shared<FormCache>();
}

namespace {

}  // namespace

const std::vector<CellValues>* cached_cell_values(const FormContext& ctx, int degree) {
  if (!ctx.cache) return nullptr;
  for (const auto& [d, v] : ctx.cache->values) {
    if (d == degree) return &v;
  }
  const FESpace& s = *ctx.space;
  const ReferenceTables tables = s.tabulate(triangle_rule(degree));
  std::vector<CellValues> v(s.mesh().num_cells());
  for (int c = 0; c < s.mesh().num_cells(); ++c) s.cell_values(c, tables, v[c]);
  ctx.cache->values.emplace_back(degree, std::move(v));
  return &ctx.cache->values.back().second;
}

namespace {

void build_pattern(const FormContext& ctx) {
  const FESpace& s = *ctx.space;
  FormCache& cache = *ctx.cache;
  const int nc = s.mesh().num_cells();
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < nc; ++c) {
    const auto d = s.cell_velocity_dofs(c);
    for (int i : d) {
      for (int j : d) {
        if (i >= 0 && j >= 0) trip.emplace_back(i, j, 1.0);
      }
    }
  }
  cache.pattern.resize(s.n_u(), s.n_u());
  cache.pattern.setFromTriplets(trip.begin(), trip.end());
  cache.pattern.makeCompressed();
  const SparseMatrix& p = cache.pattern;
  cache.slots.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const auto d = s.cell_velocity_dofs(c);
    const int n = static_cast<int>(d.size());
    auto& slot = cache.slots[c];
    slot.assign(n * n, -1);
    for (int i = 0; i < n; ++i) {
      if (d[i] < 0) continue;
      const int* begin = p.innerIndexPtr() + p.outerIndexPtr()[d[i]];
      const int* end = p.innerIndexPtr() + p.outerIndexPtr()[d[i] + 1];
      for (int j = 0; j < n; ++j) {
        if (d[j] >= 0) slot[i * n + j] = static_cast<int>(std::lower_bound(begin, end, d[j]) - p.innerIndexPtr());
      }
    }
  }
}

// Local matrices are computed concurrently and summed in cell order, so the
// result does not depend on the thread count.
template <class Kernel>
SparseMatrix assemble_cells(const FormContext& ctx, int degree, Field rows, Field cols, Kernel kernel) {
  const FESpace& s = *ctx.space;
  const int nc = s.mesh().num_cells();
  const std::vector<CellValues>* cached = cached_cell_values(ctx, degree);
  const ReferenceTables tables = cached ? ReferenceTables{} : s.tabulate(triangle_rule(degree));
  std::vector<Eigen::MatrixXd> locals(nc);
#pragma omp parallel if (parallel(ctx))
  {
    CellValues cv;
#pragma omp for schedule(static)
    for (int c = 0; c < nc; ++c) {
      if (cached) {
        kernel((*cached)[c], locals[c]);
      } else {
        s.cell_values(c, tables, cv);
        kernel(cv, locals[c]);
      }
    }
  }
  if (ctx.cache && rows == Field::velocity && cols == Field::velocity) {
    if (ctx.cache->slots.empty()) build_pattern(ctx);
    SparseMatrix m = ctx.cache->pattern;
    double* values = m.valuePtr();
    std::fill(values, values + m.nonZeros(), 0.0);
    for (int c = 0; c < nc; ++c) {
      const auto& slot = ctx.cache->slots[c];
      const Eigen::MatrixXd& local = locals[c];
      const int n = static_cast<int>(local.rows());
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const int k = slot[i * n + j];
          if (k >= 0) values[k] += local(i, j);
        }
      }
    }
    return m;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < nc; ++c) scatter(trip, cell_dofs(s, c, rows), cell_dofs(s, c, cols), locals[c]);
  SparseMatrix m(field_size(s, rows), field_size(s, cols));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseOperator velocity_operator(const FESpace& s, SparseMatrix m) {
  return SparseOperator(std::move(m), s.n_ct(), s.n_ct());
}

// Rows of the local basis belonging to the enrichment part.
Eigen::MatrixXd r_rows(const Eigen::MatrixXd& m, int nct) {
  Eigen::MatrixXd out = m;
  out.topRows(nct).setZero();
  return out;
}

Eigen::MatrixXd ct_rows(const Eigen::MatrixXd& m, int nct) {
  Eigen::MatrixXd out = m;
  out.bottomRows(m.rows() - nct).setZero();
  return out;
}

// (w.grad) phi_j for every local basis function, as an n x 2 matrix.
Eigen::MatrixX2d convective_derivative(const VelocityBasis& b, const Vec2& w) {
  Eigen::MatrixX2d out(b.grad.rows(), 2);
  out.col(0) = b.grad.col(0) * w.x() + b.grad.col(1) * w.y();
  out.col(1) = b.grad.col(2) * w.x() + b.grad.col(3) * w.y();
  return out;
}

enum class Trilinear { vol, dG, R, none };
enum class FaceTerm { average_s, average_R, upwind, average_s_upwind };

SparseMatrix assemble_trilinear_cells(const FormContext& ctx, const Vector& w, Trilinear kind) {
  const FESpace& s = *ctx.space;
  const int nct = 2 * s.lagrange().ndof();
  return assemble_cells(ctx, ctx.degrees.trilinear, Field::velocity, Field::velocity,
                        [&](const CellValues& cv, Eigen::MatrixXd& local) {
                          const Eigen::VectorXd wl = s.gather(w, cv.cell);
                          const int n = s.local_velocity_dofs();
                          local.setZero(n, n);
                          for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
                            const VelocityBasis& b = cv.u[q];
                            const Vec2 ws = b.value.transpose() * wl;
                            const Eigen::MatrixX2d conv = convective_derivative(b, ws);
                            const double jw = cv.jxw[q];
                            const int nr = n - nct;
                            switch (kind) {
                              case Trilinear::vol:
                                local.leftCols(nct).noalias() += jw * b.value.lazyProduct(conv.topRows(nct).transpose());
                                local.topRightCorner(nct, nr).noalias() -=
                                    jw * conv.topRows(nct).lazyProduct(b.value.bottomRows(nr).transpose());
                                break;
                              case Trilinear::dG:
                                local.noalias() += jw * b.value.lazyProduct(conv.transpose());
                                break;
                              case Trilinear::R:
                                local.bottomRightCorner(nr, nr).noalias() +=
                                    jw * b.value.bottomRows(nr).lazyProduct(conv.bottomRows(nr).transpose());
                                break;
                              case Trilinear::none:
                                break;
                            }
                          }
                        });
}

void face_values(const FESpace& s, const Face& face, const QuadRule& rule, FaceValues& out) {
  const Vec2 ref_vertex[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const CellGeometry& gm = s.geometry(face.minus_cell);
  const CellGeometry& gp = s.geometry(face.plus_cell);
  const int i = face.minus_local;
  const Vec2 a = ref_vertex[(i + 1) % 3];
  const Vec2 b = ref_vertex[(i + 2) % 3];
  out.normal = gm.normals[i];
  out.minus.resize(rule.size());
  out.plus.resize(rule.size());
  out.jxw.resize(rule.size());
  for (int q = 0; q < rule.size(); ++q) {
    const Vec2 ref_m = a + rule.points[q].x() * (b - a);
    const Vec2 ref_p = gp.pull_back(gm.map(ref_m) + face.shift);
    out.minus[q] = s.velocity_basis(face.minus_cell, ref_m).value;
    out.plus[q] = s.velocity_basis(face.plus_cell, ref_p).value;
    out.jxw[q] = rule.weights[q] * gm.lengths[i];
  }
}

std::vector<int> face_dofs(const FESpace& s, const Face& face) {
  std::vector<int> dofs = cell_dofs(s, face.minus_cell, Field::velocity);
  const std::vector<int> plus = cell_dofs(s, face.plus_cell, Field::velocity);
  dofs.insert(dofs.end(), plus.begin(), plus.end());
  return dofs;
}

void build_face_cache(const FormContext& ctx, std::span<const Face> faces) {
  const FESpace& s = *ctx.space;
  FormCache& cache = *ctx.cache;
  const QuadRule rule = edge_rule(ctx.degrees.face);
  const int nf = static_cast<int>(faces.size());
  cache.faces.resize(nf);
  for (int fi = 0; fi < nf; ++fi) face_values(s, faces[fi], rule, cache.faces[fi]);
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::vector<int>> dofs(nf);
  for (int fi = 0; fi < nf; ++fi) {
    dofs[fi] = face_dofs(s, faces[fi]);
    for (int i : dofs[fi]) {
      for (int j : dofs[fi]) {
        if (i >= 0 && j >= 0) trip.emplace_back(i, j, 1.0);
      }
    }
  }
  SparseMatrix& p = cache.face_pattern;
  p.resize(s.n_u(), s.n_u());
  p.setFromTriplets(trip.begin(), trip.end());
  p.makeCompressed();
  cache.face_slots.resize(nf);
  for (int fi = 0; fi < nf; ++fi) {
    const auto& d = dofs[fi];
    const int n = static_cast<int>(d.size());
    auto& slot = cache.face_slots[fi];
    slot.assign(n * n, -1);
    for (int i = 0; i < n; ++i) {
      if (d[i] < 0) continue;
      const int* begin = p.innerIndexPtr() + p.outerIndexPtr()[d[i]];
      const int* end = p.innerIndexPtr() + p.outerIndexPtr()[d[i] + 1];
      for (int j = 0; j < n; ++j) {
        if (d[j] >= 0) slot[i * n + j] = static_cast<int>(std::lower_bound(begin, end, d[j]) - p.innerIndexPtr());
      }
    }
  }
}

SparseMatrix assemble_faces(const FormContext& ctx, const Vector& w, FaceTerm term) {
  const FESpace& s = *ctx.space;
  const auto faces = s.mesh().interior_faces();
  const int nf = static_cast<int>(faces.size());
  const int n = s.local_velocity_dofs();
  const int nct = 2 * s.lagrange().ndof();
  const int nr = n - nct;
  const QuadRule rule = edge_rule(ctx.degrees.face);
  const bool cached = ctx.cache != nullptr;
  if (cached && ctx.cache->faces.empty()) build_face_cache(ctx, faces);
  std::vector<Eigen::MatrixXd> locals(nf);
#pragma omp parallel if (parallel(ctx))
  {
    FaceValues own;
    Eigen::MatrixX2d jump(2 * n, 2), test(2 * n, 2);
#pragma omp for schedule(static)
    for (int fi = 0; fi < nf; ++fi) {
      const Face& face = faces[fi];
      if (!cached) face_values(s, face, rule, own);
      const FaceValues& fv = cached ? ctx.cache->faces[fi] : own;
      const Eigen::VectorXd wm = s.gather(w, face.minus_cell);
      const Eigen::VectorXd wp = s.gather(w, face.plus_cell);
      Eigen::MatrixXd& local = locals[fi];
      local.setZero(2 * n, 2 * n);
      for (std::size_t q = 0; q < fv.jxw.size(); ++q) {
        const Eigen::MatrixX2d& vm = fv.minus[q];
        const Eigen::MatrixX2d& vp = fv.plus[q];
        const Vec2 wavg = 0.5 * (vm.transpose() * wm + vp.transpose() * wp);
        const double wn = wavg.dot(fv.normal);
        jump.setZero();
        jump.middleRows(nct, nr) = vm.bottomRows(nr);
        jump.bottomRows(nr) = -vp.bottomRows(nr);
        double coef = 0.0;
        switch (term) {
          case FaceTerm::average_s:
            test.topRows(n) = 0.5 * vm;
            test.bottomRows(n) = 0.5 * vp;
            coef = -wn;
            break;
          case FaceTerm::average_R:
            test = 0.5 * jump;
            test.bottomRows(nr) = 0.5 * vp.bottomRows(nr);
            coef = -wn;
            break;
          case FaceTerm::upwind:
            test = jump;
            coef = 0.5 * std::abs(wn);
            break;
          case FaceTerm::average_s_upwind:
            test.topRows(n) = -wn * 0.5 * vm;
            test.bottomRows(n) = -wn * 0.5 * vp;
            test += 0.5 * std::abs(wn) * jump;
            coef = 1.0;
            break;
        }
        local.noalias() += (fv.jxw[q] * coef) * test.lazyProduct(jump.transpose());
      }
    }
  }
  if (cached) {
    SparseMatrix m = ctx.cache->face_pattern;
    double* values = m.valuePtr();
    std::fill(values, values + m.nonZeros(), 0.0);
    for (int fi = 0; fi < nf; ++fi) {
      const auto& slot = ctx.cache->face_slots[fi];
      const Eigen::MatrixXd& local = locals[fi];
      const int size = static_cast<int>(local.rows());
      for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
          const int k = slot[i * size + j];
          if (k >= 0) values[k] += local(i, j);
        }
      }
    }
    return m;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int fi = 0; fi < nf; ++fi) {
    const std::vector<int> dofs = face_dofs(s, faces[fi]);
    scatter(trip, dofs, dofs, locals[fi]);
  }
  SparseMatrix m(s.n_u(), s.n_u());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

SparseOperator assemble_a_h(const FormContext& ctx) {
  const FESpace& s = *ctx.space;
  const int nct = 2 * s.lagrange().ndof();
  SparseMatrix m = assemble_cells(ctx, ctx.degrees.bilinear, Field::velocity, Field::velocity,
                                  [&](const CellValues& cv, Eigen::MatrixXd& local) {
                                    const int n = s.local_velocity_dofs();
                                    local.setZero(n, n);
                                    for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
                                      const VelocityBasis& b = cv.u[q];
                                      const Eigen::MatrixXd g = ct_rows(b.grad, nct);
                                      const Eigen::MatrixXd vr = r_rows(b.value, nct);
                                      local.noalias() += cv.jxw[q] * (g * g.transpose() - vr * b.lap.transpose() +
                                                                      b.lap * vr.transpose());
                                    }
                                  });
  if (s.facet_enrichment()) m += assemble_a_h_D(ctx).matrix();
  return velocity_operator(s, std::move(m));
}

SparseOperator assemble_a_h_D(const FormContext& ctx) {
  const FESpace& s = *ctx.space;
  if (!s.facet_enrichment()) return velocity_operator(s, SparseMatrix(s.n_u(), s.n_u()));
  const int nct = 2 * s.lagrange().ndof();
  SparseMatrix m = assemble_cells(ctx, ctx.degrees.bilinear, Field::velocity, Field::velocity,
                                  [&](const CellValues& cv, Eigen::MatrixXd& local) {
                                    const int n = s.local_velocity_dofs();
                                    local.setZero(n, n);
                                    for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
                                      const Eigen::VectorXd& d = cv.u[q].div;
                                      for (int i = nct; i < n; ++i) local(i, i) += ctx.alpha * cv.jxw[q] * d(i) * d(i);
                                    }
                                  });
  m.prune(0.0);
  return velocity_operator(s, std::move(m));
}

SparseOperator assemble_b(const FormContext& ctx) {
  const FESpace& s = *ctx.space;
  SparseMatrix m = assemble_cells(ctx, ctx.degrees.bilinear, Field::pressure, Field::velocity,
                                  [&](const CellValues& cv, Eigen::MatrixXd& local) {
                                    local.setZero(s.local_pressure_dofs(), s.local_velocity_dofs());
                                    for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
                                      local.noalias() -= cv.jxw[q] * (cv.p[q] * cv.u[q].div.transpose());
                                    }
                                  });
  return SparseOperator(std::move(m), 0, s.n_ct());
}

SparseOperator assemble_d_h(const FormContext& ctx) {
  const FESpace& s = *ctx.space;
  SparseMatrix m = assemble_cells(ctx, ctx.degrees.bilinear, Field::velocity, Field::velocity,
                                  [&](const CellValues& cv, Eigen::MatrixXd& local) {
                                    const int n = s.local_velocity_dofs();
                                    local.setZero(n, n);
                                    for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
                                      local.noalias() += cv.jxw[q] * (cv.u[q].value * cv.u[q].value.transpose());
                                    }
                                  });
  return velocity_operator(s, std::move(m));
}

SparseOperator assemble_c_vol(const FormContext& ctx, const Vector& w) {
  return velocity_operator(*ctx.space, assemble_trilinear_cells(ctx, w, Trilinear::vol));
}

SparseOperator assemble_c_dG(const FormContext& ctx, const Vector& w) {
  SparseMatrix m = assemble_trilinear_cells(ctx, w, Trilinear::dG);
  m += assemble_faces(ctx, w, FaceTerm::average_s);
  return velocity_operator(*ctx.space, std::move(m));
}

SparseOperator assemble_c_dG_uw(const FormContext& ctx, const Vector& w) {
  SparseMatrix m = assemble_trilinear_cells(ctx, w, Trilinear::dG);
  m += assemble_faces(ctx, w, FaceTerm::average_s_upwind);
  return velocity_operator(*ctx.space, std::move(m));
}

SparseOperator assemble_c_uw(const FormContext& ctx, const Vector& w) {
  return velocity_operator(*ctx.space, assemble_faces(ctx, w, FaceTerm::upwind));
}

SparseOperator assemble_c_R(const FormContext& ctx, const Vector& w) {
  SparseMatrix m = assemble_trilinear_cells(ctx, w, Trilinear::R);
  m += assemble_faces(ctx, w, FaceTerm::average_R);
  return velocity_operator(*ctx.space, std::move(m));
}

SparseOperator assemble_S(const FormContext& ctx, Stabilization variant) {
  const FESpace& s = *ctx.space;
  const int nct = 2 * s.lagrange().ndof();
  SparseMatrix m = assemble_cells(ctx, ctx.degrees.bilinear, Field::velocity, Field::velocity,
                                  [&](const CellValues& cv, Eigen::MatrixXd& local) {
                                    const int n = s.local_velocity_dofs();
                                    local.setZero(n, n);
                                    const double scale =
                                        variant == Stabilization::S2 ? 1.0 / s.geometry(cv.cell).h : 1.0;
                                    for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
                                      const Eigen::MatrixXd vr = r_rows(cv.u[q].value, nct);
                                      local.noalias() += scale * cv.jxw[q] * (vr * vr.transpose());
                                    }
                                  });
  return velocity_operator(s, std::move(m));
}

Vector assemble_rhs(const FormContext& ctx, const VectorFunction& f, double t) {
  const FESpace& s = *ctx.space;
  Vector out = Vector::Zero(s.n_u());
  if (!f) return out;
  const int nc = s.mesh().num_cells();
  const std::vector<CellValues>* cached = cached_cell_values(ctx, ctx.degrees.rhs);
  const ReferenceTables tables = cached ? ReferenceTables{} : s.tabulate(triangle_rule(ctx.degrees.rhs));
  std::vector<Eigen::VectorXd> locals(nc);
#pragma omp parallel if (parallel(ctx))
  {
    CellValues own;
#pragma omp for schedule(static)
    for (int c = 0; c < nc; ++c) {
      if (!cached) s.cell_values(c, tables, own);
      const CellValues& cv = cached ? (*cached)[c] : own;
      locals[c].setZero(s.local_velocity_dofs());
      for (std::size_t q = 0; q < cv.jxw.size(); ++q) locals[c].noalias() += cv.jxw[q] * (cv.u[q].value * f(t, cv.x[q]));
    }
  }
  for (int c = 0; c < nc; ++c) {
    const auto dofs = s.cell_velocity_dofs(c);
    for (std::size_t i = 0; i < dofs.size(); ++i) {
      if (dofs[i] >= 0) out(dofs[i]) += locals[c](i);
    }
  }
  return out;
}

}  // namespace svfem
