#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "svfem/forms.hpp"

using namespace svfem;

namespace {

// Slow oracle: point evaluation of the discrete fields on a denser rule.
struct Oracle {
  const FESpace& s;
  QuadRule rule = collapsed_triangle_rule(16);
  QuadRule edge = edge_rule(20);

  Vec2 val(const Vector& u, int c, const Vec2& ref, Part p) const { return s.evaluate(u, c, ref, p); }
  Mat2 grad(const Vector& u, int c, const Vec2& ref, Part p) const { return s.evaluate_gradient(u, c, ref, p); }
  // Laplacian by central differences of the gradient; exact while the
  // gradient is at most quadratic (k <= 3).
  Vec2 lap(const Vector& u, int c, const Vec2& ref) const {
    const CellGeometry& g = s.geometry(c);
    const double d = 0.1 * g.h;
    const Vec2 x = g.map(ref);
    Vec2 out = Vec2::Zero();
    for (int i = 0; i < 2; ++i) {
      Vec2 e = Vec2::Zero();
      e(i) = d;
      const Mat2 gp = grad(u, c, g.pull_back(x + e), Part::ct);
      const Mat2 gm = grad(u, c, g.pull_back(x - e), Part::ct);
      out += (gp.col(i) - gm.col(i)) / (2 * d);
    }
    return out;
  }
  double div(const Vector& u, int c, const Vec2& ref) const { return grad(u, c, ref, Part::s).trace(); }

  template <class F>
  double cells(F f) const {
    double sum = 0.0;
    for (int c = 0; c < s.mesh().num_cells(); ++c) {
      for (int q = 0; q < rule.size(); ++q) sum += rule.weights[q] * s.geometry(c).det * f(c, rule.points[q]);
    }
    return sum;
  }
  // f(minus cell, minus ref, plus cell, plus ref, normal)
  template <class F>
  double faces(F f) const { return faces_with(edge, f); }
  template <class F>
  double faces_with(const QuadRule& edge, F f) const {
    const Vec2 rv[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    double sum = 0.0;
    for (const Face& fc : s.mesh().interior_faces()) {
      const CellGeometry& gm = s.geometry(fc.minus_cell);
      const Vec2 a = rv[(fc.minus_local + 1) % 3], b = rv[(fc.minus_local + 2) % 3];
      for (int q = 0; q < edge.size(); ++q) {
        const Vec2 rm = a + edge.points[q].x() * (b - a);
        const Vec2 rp = s.geometry(fc.plus_cell).pull_back(gm.map(rm) + fc.shift);
        sum += edge.weights[q] * gm.lengths[fc.minus_local] *
               f(fc.minus_cell, rm, fc.plus_cell, rp, gm.normals[fc.minus_local]);
      }
    }
    return sum;
  }

  double a_h(const Vector& u, const Vector& v) const {
    return cells([&](int c, const Vec2& r) {
      const Mat2 gu = grad(u, c, r, Part::ct), gv = grad(v, c, r, Part::ct);
      return (gu.array() * gv.array()).sum() - lap(u, c, r).dot(val(v, c, r, Part::R)) +
             lap(v, c, r).dot(val(u, c, r, Part::R));
    });
  }
  double conv(const Vector& w, const Vector& u, Part pu, const Vector& v, Part pv) const {
    return cells([&](int c, const Vec2& r) {
      return (grad(u, c, r, pu) * val(w, c, r, Part::s)).dot(val(v, c, r, pv));
    });
  }
  double face_avg(const Vector& w, const Vector& u, const Vector& v, Part pv) const {
    return faces([&](int cm, const Vec2& rm, int cp, const Vec2& rp, const Vec2& n) {
      const double wn = val(w, cm, rm, Part::s).dot(n);
      const Vec2 ju = val(u, cm, rm, Part::R) - val(u, cp, rp, Part::R);
      const Vec2 av = 0.5 * (val(v, cm, rm, pv) + val(v, cp, rp, pv));
      return wn * ju.dot(av);
    });
  }
  // |w.n| is not polynomial across sign changes: use the assembly rule.
  double upwind(const Vector& w, const Vector& u, const Vector& v) const {
    return faces_with(edge_rule(3 * s.order()), [&](int cm, const Vec2& rm, int cp, const Vec2& rp, const Vec2& n) {
      const double wn = val(w, cm, rm, Part::s).dot(n);
      const Vec2 ju = val(u, cm, rm, Part::R) - val(u, cp, rp, Part::R);
      const Vec2 jv = val(v, cm, rm, Part::R) - val(v, cp, rp, Part::R);
      return 0.5 * std::abs(wn) * ju.dot(jv);
    });
  }
};

void check_close(double assembled, double oracle, double scale) {
  CHECK(std::abs(assembled - oracle) <= 1e-12 * std::max(1.0, scale));
}

Mesh small_mesh() { return refine_uniform(testing::two_cell_mesh(), 1); }

}  // namespace

TEST_CASE("bilinear forms match the quadrature oracle") {
  std::mt19937 rng(11);
  for (int k = 1; k <= 3; ++k) {
    for (const Mesh& m : {testing::two_cell_mesh(), testing::torus(2)}) {
      const FESpace s(m, k);
      const FormContext ctx(s);
      const Oracle o{s};
      const Vector u = testing::random_vector(s.n_u(), rng), v = testing::random_vector(s.n_u(), rng);
      const SparseOperator a = assemble_a_h(ctx);
      const SparseOperator ad = assemble_a_h_D(ctx);
      const double a_oracle = o.a_h(u, v);
      check_close(a.bilinear(v, u) - ad.bilinear(v, u), a_oracle, std::abs(a_oracle));
      const SparseOperator d = assemble_d_h(ctx);
      const double d_oracle =
          o.cells([&](int c, const Vec2& r) { return o.val(u, c, r, Part::s).dot(o.val(v, c, r, Part::s)); });
      check_close(d.bilinear(v, u), d_oracle, std::abs(d_oracle));
      const SparseOperator s1 = assemble_S(ctx, Stabilization::S1);
      const SparseOperator s2 = assemble_S(ctx, Stabilization::S2);
      const double s1_oracle =
          o.cells([&](int c, const Vec2& r) { return o.val(u, c, r, Part::R).dot(o.val(v, c, r, Part::R)); });
      const double s2_oracle = o.cells([&](int c, const Vec2& r) {
        return o.val(u, c, r, Part::R).dot(o.val(v, c, r, Part::R)) / s.geometry(c).h;
      });
      check_close(s1.bilinear(v, u), s1_oracle, std::abs(s1_oracle));
      check_close(s2.bilinear(v, u), s2_oracle, std::abs(s2_oracle));
      const SparseOperator b = assemble_b(ctx);
      const Vector p = testing::random_vector(s.n_p(), rng);
      const double b_oracle = o.cells([&](int c, const Vec2& r) { return -o.div(u, c, r) * s.evaluate_pressure(p, c, r); });
      check_close(p.dot(b.apply(u)), b_oracle, std::abs(b_oracle));
    }
  }
}

TEST_CASE("trilinear forms match the quadrature oracle") {
  std::mt19937 rng(12);
  for (int k = 1; k <= 3; ++k) {
    for (const Mesh& m : {small_mesh(), testing::torus(2)}) {
      const FESpace s(m, k);
      const FormContext ctx(s);
      const Oracle o{s};
      const Vector w = testing::random_vector(s.n_u(), rng);
      const Vector u = testing::random_vector(s.n_u(), rng), v = testing::random_vector(s.n_u(), rng);
      const double vol = o.conv(w, u, Part::ct, v, Part::s) - o.conv(w, v, Part::ct, u, Part::R);
      check_close(assemble_c_vol(ctx, w).bilinear(v, u), vol, std::abs(vol));
      const double dg = o.conv(w, u, Part::s, v, Part::s) - o.face_avg(w, u, v, Part::s);
      check_close(assemble_c_dG(ctx, w).bilinear(v, u), dg, std::abs(dg));
      const double cr = o.conv(w, u, Part::R, v, Part::R) - o.face_avg(w, u, v, Part::R);
      check_close(assemble_c_R(ctx, w).bilinear(v, u), cr, std::abs(cr));
      const double uw = o.upwind(w, u, v);
      check_close(assemble_c_uw(ctx, w).bilinear(v, u), uw, std::abs(uw));
    }
  }
}

TEST_CASE("a_h structure") {
  std::mt19937 rng(13);
  SUBCASE("k = 1 coupling vanishes and a_D is diagonal") {
    const FESpace s(small_mesh(), 1);
    FormContext ctx(s);
    const SparseOperator a = assemble_a_h(ctx);
    CHECK(a.block(Block::cR).norm() == 0.0);
    CHECK(a.block(Block::Rc).norm() == 0.0);
    const SparseOperator ad = assemble_a_h_D(ctx);
    const SparseMatrix rr = ad.block(Block::RR);
    CHECK(rr.nonZeros() == rr.rows());
    for (int i = 0; i < rr.rows(); ++i) CHECK(rr.coeff(i, i) > 0.0);
    ctx.alpha = 2.0;
    const SparseOperator ad2 = assemble_a_h_D(ctx);
    CHECK((SparseMatrix(ad2.matrix() - 2.0 * ad.matrix())).norm() == 0.0);
  }
  SUBCASE("k = 1 single interior facet entry") {
    const FESpace s(testing::two_cell_mesh(), 1);
    REQUIRE(s.n_R() == 1);
    const Oracle o{s};
    Vector e = Vector::Zero(s.n_u());
    e(s.n_ct()) = 1.0;
    const double oracle = o.cells([&](int c, const Vec2& r) { return std::pow(o.div(e, c, r), 2); });
    const double entry = assemble_a_h_D(FormContext(s)).matrix().coeff(s.n_ct(), s.n_ct());
    CHECK(oracle > 0.0);
    CHECK(std::abs(entry - oracle) < 1e-12 * oracle);
  }
  SUBCASE("k >= 2 coupling blocks are negative transposes") {
    for (int k = 2; k <= 4; ++k) {
      const FESpace s(testing::torus(2), k);
      const FormContext ctx(s);
      const SparseOperator a = assemble_a_h(ctx);
      CHECK(assemble_a_h_D(ctx).nonzeros() == 0);
      const SparseMatrix sum = a.block(Block::cR) + SparseMatrix(a.block(Block::Rc).transpose());
      CHECK(sum.norm() <= 1e-12 * a.max_abs());
      for (int t = 0; t < 5; ++t) {
        const Vector u = testing::random_vector(s.n_u(), rng), v = testing::random_vector(s.n_u(), rng);
        Vector uc = u, vc = v;
        uc.tail(s.n_R()).setZero();
        vc.tail(s.n_R()).setZero();
        const double lhs = a.bilinear(v, u) + a.bilinear(u, v);
        const double rhs = 2.0 * a.bilinear(vc, uc);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
        CHECK(a.bilinear(v, v) >= -1e-12 * a.max_abs());
      }
    }
  }
}

TEST_CASE("divergence operator") {
  const FESpace s(testing::torus(4), 2);
  const FormContext ctx(s);
  const SparseOperator b = assemble_b(ctx);
  // (y, x) is not periodic: use a Dirichlet-free square instead.
  const FESpace sq(build_structured(3, 3, StructuredPattern::uniform_diag), 2);
  const FormContext cq(sq);
  const SparseOperator bq = assemble_b(cq);
  Vector u(sq.n_u());
  u.setZero();
  const int nl = sq.lagrange().ndof();
  for (int c = 0; c < sq.mesh().num_cells(); ++c) {
    const auto nodes = sq.cell_nodes(c);
    for (int a = 0; a < nl; ++a) {
      const Vec2 x = sq.geometry(c).map(sq.lagrange().nodes()[a]);
      u(2 * nodes[a]) = x.y();
      u(2 * nodes[a] + 1) = x.x();
    }
  }
  CHECK(bq.apply(u).cwiseAbs().maxCoeff() <= 1e-13);
  for (int c = 0; c < sq.mesh().num_cells(); ++c) {
    const auto nodes = sq.cell_nodes(c);
    for (int a = 0; a < nl; ++a) {
      const Vec2 x = sq.geometry(c).map(sq.lagrange().nodes()[a]);
      u(2 * nodes[a]) = x.x();
      u(2 * nodes[a] + 1) = 0.0;
    }
  }
  const Vector bu = bq.apply(u);
  for (int c = 0; c < sq.mesh().num_cells(); ++c) {
    CHECK(std::abs(bu(sq.pressure_dof(c, 0)) + sq.geometry(c).area()) < 1e-14);
    for (int i = 1; i < sq.local_pressure_dofs(); ++i) CHECK(std::abs(bu(sq.pressure_dof(c, i))) < 1e-14);
  }
  // bubble columns touch the pressure rows of their own cell only
  const SparseMatrix bt = b.matrix().transpose();
  for (int c = 0; c < s.mesh().num_cells(); ++c) {
    const auto dofs = s.cell_velocity_dofs(c);
    for (int i = 2 * s.lagrange().ndof(); i < s.local_velocity_dofs(); ++i) {
      for (SparseMatrix::InnerIterator it(bt, dofs[i]); it; ++it) CHECK(it.col() / s.local_pressure_dofs() == c);
    }
  }
}

TEST_CASE("mass matrix and right-hand side") {
  const FESpace s(testing::torus(4), 2);
  const FormContext ctx(s);
  const double cval = 1.7;
  const Vector u = s.interpolate([&](double, const Vec2&) { return Vec2(cval, 0.0); });
  const SparseOperator d = assemble_d_h(ctx);
  CHECK(std::abs(d.bilinear(u, u) - cval * cval) < 1e-13);
  const SparseMatrix diff = d.block(Block::RR) - assemble_S(ctx, Stabilization::S1).block(Block::RR);
  CHECK(diff.norm() == 0.0);
  // V_ct and V_R intersect, so d_h is only semidefinite; a_h is positive on
  // its kernel, which keeps the time-step matrices regular.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(d.matrix()));
  CHECK(es.eigenvalues().minCoeff() >= -1e-14 * es.eigenvalues().maxCoeff());
  const Eigen::MatrixXd a = Eigen::MatrixXd(assemble_a_h(ctx).matrix());
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > 1e-12 * es.eigenvalues().maxCoeff()) continue;
    const Eigen::VectorXd z = es.eigenvectors().col(i);
    CHECK(z.dot(a * z) > 1e-6);
  }
  CHECK(assemble_rhs(ctx, nullptr, 0.0).norm() == 0.0);
  CHECK(assemble_rhs(ctx, [](double, const Vec2&) { return Vec2::Zero(); }, 0.0).norm() == 0.0);
  const Vector f = assemble_rhs(ctx, [](double, const Vec2&) { return Vec2(1.0, 0.0); }, 0.0);
  CHECK(std::abs(f.dot(u) / cval - 1.0) < 1e-13);
}

TEST_CASE("convection sanity") {
  std::mt19937 rng(14);
  const FESpace s(testing::torus(4), 2);
  const FormContext ctx(s);
  CHECK(assemble_c_vol(ctx, Vector::Zero(s.n_u())).max_abs() == 0.0);
  for (int t = 0; t < 5; ++t) {
    const Vector w = testing::random_vector(s.n_u(), rng), v = testing::random_vector(s.n_u(), rng);
    const SparseOperator uw = assemble_c_uw(ctx, w);
    CHECK(uw.bilinear(v, v) >= -1e-14);
    Vector vc = v;
    vc.tail(s.n_R()).setZero();
    CHECK(uw.apply(vc).norm() == 0.0);
    Vector vr = Vector::Zero(s.n_u());
    vr.tail(s.n_R()) = v.tail(s.n_R());
    CHECK(assemble_c_R(ctx, w).apply(vc).norm() == 0.0);
    CHECK(vc.dot(assemble_c_R(ctx, w).apply(vr)) == 0.0);
  }
}

TEST_CASE("S2 scales with the inverse mesh size") {
  const Mesh m = testing::torus(4);
  std::vector<double> ratio;
  for (int level = 0; level < 2; ++level) {
    const FESpace s(refine_uniform(m, level), 2);
    const FormContext ctx(s);
    ratio.push_back(assemble_S(ctx, Stabilization::S2).block(Block::RR).norm() /
                    assemble_S(ctx, Stabilization::S1).block(Block::RR).norm());
  }
  CHECK(std::abs(ratio[1] / ratio[0] - 2.0) <= 0.1);
}

TEST_CASE("serial and parallel assembly agree bitwise") {
  std::mt19937 rng(15);
  const FESpace s(refine_uniform(testing::torus(4), 1), 2);
  const FormContext ser(s, Execution::serial), par(s, Execution::parallel);
  const Vector w = testing::random_vector(s.n_u(), rng);
  auto same = [](const SparseOperator& a, const SparseOperator& b) {
    return a.nonzeros() == b.nonzeros() &&
           std::equal(a.matrix().valuePtr(), a.matrix().valuePtr() + a.nonzeros(), b.matrix().valuePtr()) &&
           std::equal(a.matrix().innerIndexPtr(), a.matrix().innerIndexPtr() + a.nonzeros(),
                      b.matrix().innerIndexPtr());
  };
  CHECK(same(assemble_a_h(ser), assemble_a_h(par)));
  CHECK(same(assemble_b(ser), assemble_b(par)));
  CHECK(same(assemble_c_dG(ser, w), assemble_c_dG(par, w)));
  CHECK(same(assemble_c_uw(ser, w), assemble_c_uw(par, w)));
  const auto f = [](double, const Vec2& x) { return Vec2(std::sin(x.x()), x.y()); };
  CHECK(assemble_rhs(ser, f, 0.0) == assemble_rhs(par, f, 0.0));
}

TEST_CASE("matrix market dump") {
  const FESpace s(testing::two_cell_mesh(), 1);
  const SparseOperator d = assemble_d_h(FormContext(s));
  std::stringstream ss;
  d.write_matrix_market(ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  int r = 0, c = 0;
  long nnz = 0;
  ss >> r >> c >> nnz;
  CHECK(r == s.n_u());
  CHECK(nnz == d.nonzeros());
}
