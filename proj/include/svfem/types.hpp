#pragma once

#include <Eigen/Core>
#include <functional>

namespace svfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;

/// Time-dependent vector field f(t, x).
using VectorFunction = std::function<Vec2(double t, const Vec2& x)>;
/// Time-dependent scalar field.
using ScalarFunction = std::function<double(double t, const Vec2& x)>;
/// Jacobian of a vector field: row i holds grad of component i.
using GradientFunction = std::function<Mat2(double t, const Vec2& x)>;

enum class Execution { serial, parallel };

/// Number of threads used by parallel kernels (1 when built without OpenMP).
int max_threads();

}  // namespace svfem
