#include "svfem/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "svfem/error.hpp"

namespace svfem {

namespace {

// Adds the orbit of barycentric point (a, a, 1-2a) or (a, b, 1-a-b).
void add_orbit3(QuadRule& rule, double a, double w) {
  const double c = 1.0 - 2.0 * a;
  for (const Vec2& p : {Vec2(a, a), Vec2(c, a), Vec2(a, c)}) {
    rule.points.push_back(p);
    rule.weights.push_back(0.5 * w);
  }
}

void add_orbit6(QuadRule& rule, double a, double b, double w) {
  const double c = 1.0 - a - b;
  for (const Vec2& p : {Vec2(a, b), Vec2(b, a), Vec2(a, c), Vec2(c, a), Vec2(b, c), Vec2(c, b)}) {
    rule.points.push_back(p);
    rule.weights.push_back(0.5 * w);
  }
}

}  // namespace

void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "quadrature needs at least one point");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      jac(0, 0) = (beta - alpha) / (ab + 2.0);
    } else {
      jac(i, i) = (beta * beta - alpha * alpha) / ((2.0 * i + ab) * (2.0 * i + ab + 2.0));
    }
    if (i + 1 < n) {
      const double k = i + 1.0;
      const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
      const double den = (2.0 * k + ab) * (2.0 * k + ab) * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0);
      jac(i, i + 1) = jac(i + 1, i) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                     std::tgamma(ab + 2.0);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

QuadRule edge_rule(int degree) {
  if (degree < 0 || degree > 40) throw Error(ErrorCode::unsupported_degree, "edge rule degree out of range");
  const int n = std::max(1, (degree + 2) / 2);
  std::vector<double> x, w;
  gauss_jacobi(n, 0.0, 0.0, x, w);
  QuadRule rule;
  rule.exact_degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    rule.points.emplace_back(0.5 * (x[i] + 1.0), 0.0);
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

QuadRule collapsed_triangle_rule(int degree) {
  const int n = std::max(1, (degree + 2) / 2);
  std::vector<double> xl, wl, xj, wj;
  gauss_jacobi(n, 0.0, 0.0, xl, wl);
  gauss_jacobi(n, 1.0, 0.0, xj, wj);
  QuadRule rule;
  rule.exact_degree = 2 * n - 1;
  for (int j = 0; j < n; ++j) {
    const double v = 0.5 * (1.0 + xj[j]);
    for (int i = 0; i < n; ++i) {
      const double u = 0.5 * (1.0 + xl[i]);
      rule.points.emplace_back(u * (1.0 - v), v);
      rule.weights.push_back(0.125 * wl[i] * wj[j]);
    }
  }
  return rule;
}

QuadRule triangle_rule(int degree) {
  if (degree < 0 || degree > 20) throw Error(ErrorCode::unsupported_degree, "triangle rule degree out of range");
  QuadRule rule;
  switch (degree) {
    case 0:
    case 1:
      rule.points = {Vec2(1.0 / 3.0, 1.0 / 3.0)};
      rule.weights = {0.5};
      rule.exact_degree = 1;
      return rule;
    case 2:
      add_orbit3(rule, 1.0 / 6.0, 1.0 / 3.0);
      rule.exact_degree = 2;
      return rule;
    case 3:
    case 4:
      add_orbit3(rule, 0.44594849091596488632, 0.22338158967801146570);
      add_orbit3(rule, 0.09157621350977074346, 0.10995174365532186764);
      rule.exact_degree = 4;
      return rule;
    case 5:
      rule.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
      rule.weights.push_back(0.5 * 0.225);
      add_orbit3(rule, 0.47014206410511508977, 0.13239415278850618074);
      add_orbit3(rule, 0.10128650732345633880, 0.12593918054482715260);
      rule.exact_degree = 5;
      return rule;
    case 6:
      add_orbit3(rule, 0.24928674517091042129, 0.11678627572637936603);
      add_orbit3(rule, 0.06308901449150222834, 0.05084490637020681692);
      add_orbit6(rule, 0.31035245103378440542, 0.05314504984481694735, 0.08285107561837357519);
      rule.exact_degree = 6;
      return rule;
    default:
      return collapsed_triangle_rule(degree);
  }
}

}  // namespace svfem
