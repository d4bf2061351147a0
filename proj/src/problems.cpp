#include "svfem/problems.hpp"

#include <cmath>
#include <numbers>

namespace svfem {

namespace {

constexpr double pi = std::numbers::pi;

// u1 = A a(x) b(y), u2 = -A b(x) a(y) with a = sin^2(pi s), b = sin(pi s) cos(pi s).
struct Profile {
  double a, da, dda, b, db, ddb;
};

Profile profile(double s) {
  Profile p;
  p.a = std::pow(std::sin(pi * s), 2);
  p.da = pi * std::sin(2 * pi * s);
  p.dda = 2 * pi * pi * std::cos(2 * pi * s);
  p.b = 0.5 * std::sin(2 * pi * s);
  p.db = pi * std::cos(2 * pi * s);
  p.ddb = -2 * pi * pi * std::sin(2 * pi * s);
  return p;
}

}  // namespace

Vec2 ManufacturedFlow::velocity(double t, const Vec2& x) const {
  const double amp = 2 * pi * std::sin(pi * t);
  const Profile px = profile(x(0)), py = profile(x(1));
  return {amp * px.a * py.b, -amp * px.b * py.a};
}

Mat2 ManufacturedFlow::gradient(double t, const Vec2& x) const {
  const double amp = 2 * pi * std::sin(pi * t);
  const Profile px = profile(x(0)), py = profile(x(1));
  Mat2 g;
  g << amp * px.da * py.b, amp * px.a * py.db, -amp * px.db * py.a, -amp * px.b * py.da;
  return g;
}

Vec2 ManufacturedFlow::laplacian(double t, const Vec2& x) const {
  const double amp = 2 * pi * std::sin(pi * t);
  const Profile px = profile(x(0)), py = profile(x(1));
  return {amp * (px.dda * py.b + px.a * py.ddb), -amp * (px.ddb * py.a + px.b * py.dda)};
}

Vec2 ManufacturedFlow::time_derivative(double t, const Vec2& x) const {
  // sin(pi / 2) = 1, so velocity(0.5, .) is the spatial profile
  return velocity(0.5, x) * (pi * std::cos(pi * t));
}

double ManufacturedFlow::pressure(double t, const Vec2& x) const {
  return pressure_scale * std::sin(pi * t) * (x(0) * x(0) * x(1) - 1.0 / 6.0);
}

Vec2 ManufacturedFlow::pressure_gradient(double t, const Vec2& x) const {
  const double s = pressure_scale * std::sin(pi * t);
  return {s * 2 * x(0) * x(1), s * x(0) * x(0)};
}

Vec2 ManufacturedFlow::forcing(double t, const Vec2& x) const {
  const Vec2 u = velocity(t, x);
  return time_derivative(t, x) + gradient(t, x) * u - nu * laplacian(t, x) + pressure_gradient(t, x);
}

VectorFunction ManufacturedFlow::velocity_function() const {
  return [f = *this](double t, const Vec2& x) { return f.velocity(t, x); };
}

GradientFunction ManufacturedFlow::gradient_function() const {
  return [f = *this](double t, const Vec2& x) { return f.gradient(t, x); };
}

VectorFunction ManufacturedFlow::forcing_function() const {
  return [f = *this](double t, const Vec2& x) { return f.forcing(t, x); };
}

double gradient_potential(const Vec2& x) {
  return std::sin(2 * pi * x(0)) * std::cos(3 * pi * x(1)) + x(0) * x(0) * x(0) * x(1);
}

Vec2 gradient_potential_grad(const Vec2& x) {
  return {2 * pi * std::cos(2 * pi * x(0)) * std::cos(3 * pi * x(1)) + 3 * x(0) * x(0) * x(1),
          -3 * pi * std::sin(2 * pi * x(0)) * std::sin(3 * pi * x(1)) + x(0) * x(0) * x(0)};
}

Vec2 ShearLayer::velocity(const Vec2& x) const {
  const double y = x(1) - 0.5;
  const double e = u_inf * std::exp(-y * y / (delta0 * delta0));
  const double waves = std::cos(8 * pi * x(0)) + std::cos(20 * pi * x(0));
  const double dwaves = -8 * pi * std::sin(8 * pi * x(0)) - 20 * pi * std::sin(20 * pi * x(0));
  const double psi_y = e * (-2 * y / (delta0 * delta0)) * waves;
  const double psi_x = e * dwaves;
  return {u_inf * std::tanh((2 * x(1) - 1) / delta0) - c_n * psi_y, c_n * psi_x};
}

double ShearLayer::vorticity(const Vec2& x) const {
  const double y = x(1) - 0.5;
  const double d2 = delta0 * delta0;
  const double e = u_inf * std::exp(-y * y / d2);
  const double waves = std::cos(8 * pi * x(0)) + std::cos(20 * pi * x(0));
  const double ddwaves = -64 * pi * pi * std::cos(8 * pi * x(0)) - 400 * pi * pi * std::cos(20 * pi * x(0));
  const double psi_yy = e * (4 * y * y / (d2 * d2) - 2 / d2) * waves;
  const double psi_xx = e * ddwaves;
  const double sech = 1.0 / std::cosh((2 * x(1) - 1) / delta0);
  // curl of (-psi_y, psi_x) is the Laplacian of psi
  return -u_inf * 2.0 / delta0 * sech * sech + c_n * (psi_xx + psi_yy);
}

VectorFunction ShearLayer::velocity_function() const {
  return [f = *this](double, const Vec2& x) { return f.velocity(x); };
}

Vec2 periodic_swirl(const Vec2& x) {
  return {std::sin(2 * pi * x(0)) * std::cos(2 * pi * x(1)) + 0.3 * std::cos(2 * pi * x(1)),
          -std::cos(2 * pi * x(0)) * std::sin(2 * pi * x(1)) + 0.2};
}

Mesh shear_layer_mesh(int n) {
  Mesh m = build_structured(n, n, StructuredPattern::crisscross_2x2);
  m.tag_side(Axis::x, false, BoundaryTag::periodic_left);
  m.tag_side(Axis::x, true, BoundaryTag::periodic_right);
  m.tag_side(Axis::y, false, BoundaryTag::slip_bottom);
  m.tag_side(Axis::y, true, BoundaryTag::slip_top);
  m.identify_periodic(Axis::x, 1.0);
  return m;
}

Mesh periodic_square(int n, StructuredPattern pattern) {
  Mesh m = build_structured(n, n, pattern);
  m.tag_side(Axis::x, false, BoundaryTag::periodic_left);
  m.tag_side(Axis::x, true, BoundaryTag::periodic_right);
  m.tag_side(Axis::y, false, BoundaryTag::periodic_bottom);
  m.tag_side(Axis::y, true, BoundaryTag::periodic_top);
  m.identify_periodic(Axis::x, 1.0);
  m.identify_periodic(Axis::y, 1.0);
  return m;
}

Vec2 CompactVortex::velocity(const Vec2& x) const {
  const Vec2 d = x - center;
  const double s = radius * radius - d.squaredNorm();
  if (s <= 0.0) return Vec2::Zero();
  // psi = s^4, grad psi = -8 s^3 d, velocity = (dpsi/dy, -dpsi/dx)
  const double g = -8.0 * s * s * s;
  return {g * d(1), -g * d(0)};
}

VectorFunction CompactVortex::velocity_function() const {
  return [f = *this](double, const Vec2& x) { return f.velocity(x); };
}

}  // namespace svfem
