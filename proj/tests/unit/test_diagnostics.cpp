#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "svfem/diagnostics.hpp"
#include "svfem/problems.hpp"
#include "svfem/error.hpp"
#include "svfem/quadrature.hpp"

using namespace svfem;

namespace {

Mesh free_patch(int n) {
  Mesh m = build_structured(n, n, StructuredPattern::uniform_diag);
  for (int f = 0; f < m.num_facets(); ++f) {
    if (m.is_boundary(f)) m.set_tag(f, BoundaryTag::interior);
  }
  return m;
}

VectorFunction constant(Vec2 c) {
  return [c](double, const Vec2&) { return c; };
}

}  // namespace

TEST_CASE("energy and momenta of simple fields") {
  const Mesh m = testing::torus(4);
  for (int k : {1, 2}) {
    FESpace s(m, k);
    const Vector zero = Vector::Zero(s.n_u());
    CHECK(kinetic_energy(s, zero) == 0.0);
    CHECK(momenta(s, zero).linear.norm() == 0.0);
    CHECK(momenta(s, zero).angular == 0.0);
    const Vector u = s.interpolate(constant(Vec2(1.0, 0.0)));
    CHECK(kinetic_energy(s, u) == doctest::Approx(0.5).epsilon(1e-14));
    const Momenta mm = momenta(s, u);
    CHECK(mm.linear(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(mm.linear(1)) < 1e-14);
    CHECK(enstrophy(s, u) < 1e-28);
  }
}

TEST_CASE("energy equals half U^T D U") {
  const Mesh m = testing::torus(4);
  std::mt19937 rng(7);
  for (int k : {1, 2, 3}) {
    FESpace s(m, k);
    const SparseMatrix d = assemble_d_h(FormContext(s)).matrix();
    for (int i = 0; i < 20; ++i) {
      const Vector u = testing::random_vector(s.n_u(), rng);
      const double e = 0.5 * u.dot(d * u);
      CHECK(std::abs(kinetic_energy(s, u) - e) <= 1e-13 * e);
    }
  }
}

TEST_CASE("rigid rotation") {
  const Mesh m = free_patch(3);
  FESpace s(m, 2);
  const Vector u = s.interpolate([](double, const Vec2& x) { return Vec2(-x(1) + 0.5, x(0) - 0.5); });
  // int (-y + 1/2) y - (x - 1/2) x over the unit square
  CHECK(momenta(s, u).angular == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
  CHECK(momenta(s, u).linear.norm() < 1e-14);
  CHECK(enstrophy(s, u) == doctest::Approx(2.0).epsilon(1e-12));
  for (double w : cell_vorticity(s, u)) CHECK(w == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("divergence of (x, 0)") {
  const Mesh m = free_patch(2);
  FESpace s(m, 1);
  const Vector u = s.interpolate([](double, const Vec2& x) { return Vec2(x(0), 0.0); });
  CHECK(divergence_norm(s, u) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(gradient_norm(s, u) == doctest::Approx(1.0).epsilon(1e-13));
  for (double d : cell_divergence(s, u)) CHECK(d == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shear layer enstrophy against a 1D integral") {
  ShearLayer kh;
  kh.c_n = 0.0;
  // 1/2 int (2/delta0)^2 sech^4((2y-1)/delta0) dy on a fine composite rule
  const QuadRule g = edge_rule(12);
  const int pieces = 2000;
  double exact = 0.0;
  for (int i = 0; i < pieces; ++i) {
    for (int q = 0; q < g.size(); ++q) {
      const double y = (i + g.points[q](0)) / pieces;
      const double s = 1.0 / std::cosh((2 * y - 1) / kh.delta0);
      exact += g.weights[q] / pieces * 0.5 * std::pow(2.0 / kh.delta0 * s * s, 2);
    }
  }
  double previous = INFINITY;
  for (int n : {16, 32}) {
    const Mesh m = shear_layer_mesh(n);
    FESpace s(m, 3);
    const double e = enstrophy(s, s.interpolate(kh.velocity_function()));
    const double err = std::abs(e - exact) / exact;
    MESSAGE("n = " << n << " enstrophy " << e << " exact " << exact);
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 2e-2);
}

TEST_CASE("vorticity thickness") {
  const Mesh m = shear_layer_mesh(8);
  FESpace s(m, 2);
  CHECK(std::isinf(vorticity_thickness(s, s.interpolate(constant(Vec2(1.0, 0.0))))));
  // u = (y^2, 0): the line integral is exactly -2y, largest on the top line inside
  const Vector u = s.interpolate([](double, const Vec2& x) { return Vec2(x(1) * x(1), 0.0); });
  CHECK(line_vorticity(s, u, 1025.0 / 2048) == doctest::Approx(-1025.0 / 1024).epsilon(1e-13));
  CHECK(vorticity_thickness(s, u) == doctest::Approx(2.0 / (2 * 2047.0 / 2048)).epsilon(1e-13));
}

TEST_CASE("thickness probe matches direct line integration") {
  const Mesh m = shear_layer_mesh(8);
  FESpace s(m, 2);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const Vector u = Vector::NullaryExpr(s.n_u(), [&] { return d(rng); });
  const ThicknessProbe probe(s);
  CHECK(probe.ordinates().size() == 1023);
  const Vector lines = probe.line_integrals(u);
  for (std::size_t i = 0; i < probe.ordinates().size(); i += 31) {
    CHECK(lines(i) == doctest::Approx(line_vorticity(s, u, probe.ordinates()[i])).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("error norms vanish on exact data") {
  const Mesh m = free_patch(2);
  FESpace s(m, 2);
  auto f = [](double t, const Vec2& x) { return Vec2(t * x(0) * x(1), x(1) * x(1) - x(0)); };
  auto g = [](double t, const Vec2& x) {
    Mat2 r;
    r << t * x(1), t * x(0), -1.0, 2 * x(1);
    return r;
  };
  ErrorAccumulator acc(s, f, g, 1e-2, StarTerm::S2);
  for (double t : {0.0, 0.5, 1.0}) acc.add(t, s.interpolate(f, t));
  CHECK(acc.linf_l2() < 1e-13);
  CHECK(acc.star_norm() < 1e-13);
}

TEST_CASE("manufactured flow") {
  ManufacturedFlow mf;
  CHECK(mf.velocity(0.5, Vec2(0.5, 0.25))(0) == doctest::Approx(std::numbers::pi).epsilon(1e-14));
  // exact field is divergence free
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Vec2 x(d(rng), d(rng));
    CHECK(std::abs(mf.gradient(d(rng), x).trace()) < 1e-12);
  }
}

TEST_CASE("manufactured forcing against finite differences") {
  // fourth-order central differences of the velocity and pressure only
  auto check = [](const ManufacturedFlow& mf, double t, const Vec2& x) {
    const double h = 1e-3;
    auto d1 = [h](auto f) { return (8 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12 * h); };
    auto d2 = [h](auto f) { return (16 * (f(h) + f(-h)) - (f(2 * h) + f(-2 * h)) - 30 * f(0.0)) / (12 * h * h); };
    const Vec2 ex(1.0, 0.0), ey(0.0, 1.0);
    const Vec2 dt = d1([&](double s) { return Vec2(mf.velocity(t + s, x)); });
    const Vec2 dx = d1([&](double s) { return Vec2(mf.velocity(t, x + s * ex)); });
    const Vec2 dy = d1([&](double s) { return Vec2(mf.velocity(t, x + s * ey)); });
    const Vec2 lap = d2([&](double s) { return Vec2(mf.velocity(t, x + s * ex)); }) +
                     d2([&](double s) { return Vec2(mf.velocity(t, x + s * ey)); });
    const Vec2 gp(d1([&](double s) { return mf.pressure(t, x + s * ex); }),
                  d1([&](double s) { return mf.pressure(t, x + s * ey); }));
    const Vec2 v = mf.velocity(t, x);
    const Vec2 fd = dt + v(0) * dx + v(1) * dy - mf.nu * lap + gp;
    return (fd - mf.forcing(t, x)).norm();
  };
  ManufacturedFlow mf;
  CHECK(check(mf, 0.5, Vec2(0.5, 0.25)) < 1e-8);
  ManufacturedFlow viscous;
  viscous.nu = 1.0;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(0.05, 0.95);
  for (int i = 0; i < 20; ++i) CHECK(check(viscous, d(rng), Vec2(d(rng), d(rng))) < 1e-7);
}

TEST_CASE("time series csv") {
  TimeSeries ts("energy");
  ts.push(0.0, 1.0);
  ts.push(0.1, 1.0 / 3.0);
  CHECK_THROWS_AS(ts.push(0.1, 2.0), Error);
  CHECK_THROWS_AS(ts.push(0.2, std::vector<double>{1.0, 2.0}), Error);
  std::ostringstream out;
  ts.write_csv(out);
  CHECK(out.str() == "t,value\n0,1\n0.10000000000000001,0.33333333333333331\n");
}
