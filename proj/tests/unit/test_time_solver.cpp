#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "svfem/diagnostics.hpp"
#include "svfem/error.hpp"
#include "svfem/problems.hpp"
#include "svfem/time_solver.hpp"

using namespace svfem;

namespace {

Vec2 swirl(double, const Vec2& x) { return periodic_swirl(x); }

Mesh dirichlet_square(int n) { return build_structured(n, n, StructuredPattern::crisscross_2x2); }

}  // namespace

TEST_CASE("scheme names round trip") {
  for (auto v : {SchemeVariant::upwind_dg, SchemeVariant::vol_S1, SchemeVariant::vol_S2})
    CHECK(parse_scheme_variant(to_string(v)) == v);
  for (auto v : {TimeIntegrator::backward_euler, TimeIntegrator::crank_nicolson})
    CHECK(parse_time_integrator(to_string(v)) == v);
  for (auto v : {ConvectionTreatment::picard_implicit, ConvectionTreatment::linearized,
                 ConvectionTreatment::explicit_rhs, ConvectionTreatment::none})
    CHECK(parse_convection(to_string(v)) == v);
  CHECK_THROWS_AS(parse_scheme_variant("upwind_vol"), Error);
}

TEST_CASE("Stokes with a gradient force has zero velocity") {
  const Mesh m = dirichlet_square(4);
  for (int k : {1, 2, 3}) {
    FESpace s(m, k);
    FlowSolver solver(s, {1.0, 1.0, 1.0}, {});
    // polynomial potential x^3 y, integrated exactly
    const FlowState st = solver.solve_stokes([](double, const Vec2& x) {
      return Vec2(3 * x(0) * x(0) * x(1), x(0) * x(0) * x(0));
    });
    CHECK(st.u.lpNorm<Eigen::Infinity>() < 1e-11);
    if (k < 3) continue;
    // p = x y - 1/4 lies in the pressure space
    const FlowState q = solver.solve_stokes([](double, const Vec2& x) { return Vec2(x(1), x(0)); });
    CHECK(q.u.lpNorm<Eigen::Infinity>() < 1e-11);
    for (int c = 0; c < m.num_cells(); c += 7) {
      const Vec2 x = s.geometry(c).map(Vec2(0.2, 0.3));
      CHECK(s.evaluate_pressure(q.p, c, Vec2(0.2, 0.3)) == doctest::Approx(x(0) * x(1) - 0.25).epsilon(1e-9));
    }
  }
}

TEST_CASE("solver outputs are divergence free") {
  const Mesh m = dirichlet_square(4);
  ManufacturedFlow mf;
  for (int k : {1, 2}) {
    for (auto variant : {SchemeVariant::upwind_dg, SchemeVariant::vol_S1, SchemeVariant::vol_S2}) {
      FESpace s(m, k);
      SchemeSpec spec;
      spec.variant = variant;
      FlowSolver solver(s, {1e-3, 1.0, 1.0}, spec);
      FlowState st = solver.set_initial(mf.velocity_function(), InitialProjection::leray, 0.1);
      CHECK(mass_residual(s, st.u) < 1e-10);
      for (int i = 0; i < 3; ++i) {
        solver.step(st, 0.01, mf.forcing_function());
        CHECK(mass_residual(s, st.u) < 1e-10);
      }
    }
  }
}

TEST_CASE("Leray projection keeps a divergence-free field") {
  const Mesh m = testing::torus(4);
  FESpace s(m, 2);
  FlowSolver solver(s, {}, {});
  const VectorFunction c = [](double, const Vec2&) { return Vec2(1.0, -0.5); };
  const FlowState st = solver.set_initial(c);
  CHECK(l2_error(s, st.u, c, 0.0) < 1e-10);
  CHECK(mass_residual(s, st.u) < 1e-10);
}

TEST_CASE("Crank-Nicolson energy balance on the torus") {
  const Mesh m = testing::torus(4);
  for (int k : {1, 2}) {
    FESpace s(m, k);
    SchemeSpec spec;
    spec.variant = SchemeVariant::vol_S2;
    spec.picard_tol = 1e-12;
    FlowSolver solver(s, {1e-3, 1.0, 1.0}, spec);
    FlowState st = solver.set_initial(swirl);
    const SparseMatrix l = 1e-3 * solver.laplace().matrix() + solver.stabilization();
    const double dt = 0.02;
    const double e0 = kinetic_energy(s, st.u);
    for (int i = 0; i < 5; ++i) {
      const Vector old = st.u;
      solver.step(st, dt, nullptr);
      const Vector mid = 0.5 * (old + st.u);
      const double balance = kinetic_energy(s, st.u) - kinetic_energy(s, old) + dt * mid.dot(l * mid);
      CHECK(std::abs(balance) <= 1e-10 * e0);
    }
  }
}

TEST_CASE("linearized convection keeps the energy balance") {
  const Mesh m = testing::torus(4);
  FESpace s(m, 2);
  SchemeSpec spec;
  spec.convection = ConvectionTreatment::linearized;
  spec.reduced = true;
  spec.frozen_factorization = true;
  FlowSolver solver(s, {1e-4, 1.0, 1.0}, spec);
  FlowState st = solver.set_initial(swirl);
  const SparseMatrix l = 1e-4 * solver.laplace().matrix() + solver.stabilization();
  const double e0 = kinetic_energy(s, st.u);
  for (int i = 0; i < 5; ++i) {
    const Vector old = st.u;
    solver.step(st, 0.02, nullptr);
    const Vector mid = 0.5 * (old + st.u);
    const double balance = kinetic_energy(s, st.u) - kinetic_energy(s, old) + 0.02 * mid.dot(l * mid);
    CHECK(std::abs(balance) <= 1e-9 * e0);
    CHECK(mass_residual(s, st.u) < 1e-10);
  }
}

TEST_CASE("linear momentum on the torus") {
  const Mesh m = testing::torus(4);
  FESpace s(m, 2);
  FlowSolver solver(s, {1e-3, 1.0, 1.0}, {});
  FlowState st = solver.set_initial(swirl);
  const Vec2 m0 = momenta(s, st.u).linear;
  for (int i = 0; i < 5; ++i) solver.step(st, 0.02, nullptr);
  CHECK((momenta(s, st.u).linear - m0).norm() <= 1e-10 * m0.norm());
}

TEST_CASE("backward Euler upwind dissipates energy") {
  const Mesh m = testing::torus(4);
  FESpace s(m, 2);
  SchemeSpec spec;
  spec.variant = SchemeVariant::upwind_dg;
  spec.integrator = TimeIntegrator::backward_euler;
  FlowSolver solver(s, {1e-6, 1.0, 1.0}, spec);
  FlowState st = solver.set_initial(swirl);
  double e = kinetic_energy(s, st.u);
  for (int i = 0; i < 5; ++i) {
    solver.step(st, 0.05, nullptr);
    const double next = kinetic_energy(s, st.u);
    CHECK(next <= e + 1e-12);
    e = next;
  }
}

TEST_CASE("Picard converges quickly in the viscous regime") {
  const Mesh m = dirichlet_square(4);
  FESpace s(m, 2);
  ManufacturedFlow mf;
  mf.nu = 1.0;
  FlowSolver solver(s, {1.0, 1.0, 1.0}, {});
  FlowState st = solver.set_initial(mf.velocity_function(), InitialProjection::leray, 0.0);
  for (int i = 0; i < 3; ++i) CHECK(solver.step(st, 0.01, mf.forcing_function()).picard_iterations <= 3);
}

TEST_CASE("reduced and full schemes agree") {
  const Mesh m = dirichlet_square(2);
  ManufacturedFlow mf;
  for (auto conv : {ConvectionTreatment::explicit_rhs, ConvectionTreatment::picard_implicit}) {
    FESpace s(m, 2);
    SchemeSpec full;
    full.convection = conv;
    full.picard_tol = 1e-13;
    SchemeSpec red = full;
    red.reduced = true;
    FlowSolver a(s, {1e-2, 1.0, 1.0}, full), b(s, {1e-2, 1.0, 1.0}, red);
    FlowState sa = a.set_initial(mf.velocity_function(), InitialProjection::interpolate, 0.1);
    FlowState sb = sa;
    for (int i = 0; i < 4; ++i) {
      a.step(sa, 0.01, mf.forcing_function());
      b.step(sb, 0.01, mf.forcing_function());
    }
    CHECK((sa.u - sb.u).norm() <= 1e-8 * sa.u.norm());
    CHECK((sa.p - sb.p).norm() <= 1e-7 * sa.p.norm());
    CHECK(b.system_velocity_dofs() == s.n_ct_free());
    CHECK(b.system_pressure_dofs() == m.num_cells());
  }
}

TEST_CASE("bubble reconstruction is cell local") {
  const Mesh m = dirichlet_square(2);
  FESpace s(m, 2);
  SchemeSpec spec;
  spec.reduced = true;
  FlowSolver solver(s, {}, spec);
  const SparseMatrix& r = solver.reconstruction();
  CHECK(r.rows() == s.n_R());
  CHECK(r.cols() == s.n_ct());
  // row of a bubble only touches ct dofs of its own cell
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto dofs = s.cell_velocity_dofs(c);
    std::vector<int> own(dofs.begin(), dofs.end());
    for (int d : dofs) {
      if (d < s.n_ct()) continue;
      for (SparseMatrix::InnerIterator it(r, d - s.n_ct()); it; ++it) {
        CHECK(std::find(own.begin(), own.end(), static_cast<int>(it.col())) != own.end());
      }
    }
  }
}

TEST_CASE("serial and parallel steps agree bitwise") {
  const Mesh m = testing::torus(4);
  FESpace s(m, 2);
  FlowSolver a(s, {1e-3, 1.0, 1.0}, {}, Execution::serial), b(s, {1e-3, 1.0, 1.0}, {}, Execution::parallel);
  FlowState sa = a.set_initial(swirl), sb = b.set_initial(swirl);
  for (int i = 0; i < 2; ++i) {
    a.step(sa, 0.02, nullptr);
    b.step(sb, 0.02, nullptr);
  }
  CHECK(sa.u == sb.u);
  CHECK(sa.p == sb.p);
}

TEST_CASE("checkpoint round trip") {
  const Mesh m = testing::torus(2);
  FESpace s(m, 2);
  FlowSolver solver(s, {1e-3, 1.0, 1.0}, {});
  FlowState st = solver.set_initial(swirl);
  solver.step(st, 0.02, nullptr);
  const auto path = std::filesystem::temp_directory_path() / "svfem_checkpoint_test.bin";
  write_checkpoint(path.string(), s, st);
  const FlowState back = read_checkpoint(path.string(), s);
  CHECK(back.t == st.t);
  CHECK(back.u == st.u);
  CHECK(back.p == st.p);
  FESpace other(m, 1);
  CHECK_THROWS_AS(read_checkpoint(path.string(), other), Error);
  std::filesystem::remove(path);
}

TEST_CASE("invalid steps are rejected") {
  const Mesh m = testing::torus(2);
  FESpace s(m, 1);
  FlowSolver solver(s, {}, {});
  FlowState st = solver.set_initial(swirl);
  CHECK_THROWS_AS(solver.step(st, 0.0, nullptr), Error);
  FlowState bad;
  CHECK_THROWS_AS(solver.step(bad, 0.1, nullptr), Error);
}
