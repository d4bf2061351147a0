#pragma once

#include "svfem/mesh.hpp"
#include "svfem/types.hpp"

namespace svfem {

/// Manufactured transient flow on the unit square with homogeneous Dirichlet
/// data: u = 2 pi sin(pi t) (sin^2(pi x) sin(pi y) cos(pi y),
/// -sin^2(pi y) sin(pi x) cos(pi x)), p = 20 sin(pi t) (x^2 y - 1/6).
struct ManufacturedFlow {
  double nu = 1e-6;
  double pressure_scale = 20.0;

  Vec2 velocity(double t, const Vec2& x) const;
  Mat2 gradient(double t, const Vec2& x) const;
  Vec2 laplacian(double t, const Vec2& x) const;
  Vec2 time_derivative(double t, const Vec2& x) const;
  double pressure(double t, const Vec2& x) const;
  Vec2 pressure_gradient(double t, const Vec2& x) const;
  /// du/dt + (u . grad) u - nu lap u + grad p, closed form.
  Vec2 forcing(double t, const Vec2& x) const;

  VectorFunction velocity_function() const;
  GradientFunction gradient_function() const;
  VectorFunction forcing_function() const;
};

/// Smooth potential used to add gradient forces, phi = sin(2 pi x) cos(3 pi y) + x^3 y.
double gradient_potential(const Vec2& x);
Vec2 gradient_potential_grad(const Vec2& x);

/// Shear layer initial field with a stream-function perturbation.
struct ShearLayer {
  double delta0 = 1.0 / 28.0;
  double u_inf = 1.0;
  double c_n = 1e-3;

  Vec2 velocity(const Vec2& x) const;
  /// Curl of velocity().
  double vorticity(const Vec2& x) const;
  VectorFunction velocity_function() const;
};

/// Divergence-free periodic field on the unit torus, a cellular flow plus a
/// shear and a uniform drift.
Vec2 periodic_swirl(const Vec2& x);

/// Unit square, crisscross pattern, periodic in x and free-slip in y.
Mesh shear_layer_mesh(int n);
/// Unit square torus with the given pattern.
Mesh periodic_square(int n, StructuredPattern pattern = StructuredPattern::crisscross_2x2);

/// Divergence-free vortex compactly supported in the disc of radius r around
/// c: u = curl(psi) with psi = (r^2 - |x - c|^2)^4 inside the disc.
struct CompactVortex {
  Vec2 center = Vec2(0.5, 0.5);
  double radius = 0.25;

  Vec2 velocity(const Vec2& x) const;
  VectorFunction velocity_function() const;
};

}  // namespace svfem
