#include "svfem/reference_element.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

#include "svfem/error.hpp"
#include "svfem/quadrature.hpp"

namespace svfem {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

int monomial_index(const std::vector<Monomial>& monos, int px, int py) {
  for (std::size_t i = 0; i < monos.size(); ++i) {
    if (monos[i].px == px && monos[i].py == py) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

std::vector<Monomial> monomials_up_to(int degree) {
  std::vector<Monomial> monos;
  for (int d = 0; d <= degree; ++d) {
    for (int px = d; px >= 0; --px) monos.push_back({px, d - px});
  }
  return monos;
}

MonomialTable tabulate_monomials(const std::vector<Monomial>& monos, const Vec2& x) {
  const int n = static_cast<int>(monos.size());
  MonomialTable t;
  t.value.resize(n);
  t.dx.resize(n);
  t.dy.resize(n);
  t.dxx.resize(n);
  t.dxy.resize(n);
  t.dyy.resize(n);
  for (int i = 0; i < n; ++i) {
    const int a = monos[i].px, b = monos[i].py;
    const double xa = ipow(x.x(), a), yb = ipow(x.y(), b);
    const double xa1 = a >= 1 ? a * ipow(x.x(), a - 1) : 0.0;
    const double yb1 = b >= 1 ? b * ipow(x.y(), b - 1) : 0.0;
    const double xa2 = a >= 2 ? a * (a - 1) * ipow(x.x(), a - 2) : 0.0;
    const double yb2 = b >= 2 ? b * (b - 1) * ipow(x.y(), b - 2) : 0.0;
    t.value(i) = xa * yb;
    t.dx(i) = xa1 * yb;
    t.dy(i) = xa * yb1;
    t.dxx(i) = xa2 * yb;
    t.dxy(i) = xa1 * yb1;
    t.dyy(i) = xa * yb2;
  }
  return t;
}

LagrangeElement::LagrangeElement(int order) : order_(order) {
  if (order < 1 || order > 4) throw Error(ErrorCode::invalid_argument, "Lagrange order must be in 1..4");
  const int k = order;
  const Vec2 verts[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  for (int i = 0; i < 3; ++i) {
    nodes_.push_back(verts[i]);
    locations_.push_back({NodeLocation::Kind::vertex, i, 0});
  }
  for (int f = 0; f < 3; ++f) {
    const Vec2& a = verts[(f + 1) % 3];
    const Vec2& b = verts[(f + 2) % 3];
    for (int j = 1; j < k; ++j) {
      nodes_.push_back(a + (static_cast<double>(j) / k) * (b - a));
      locations_.push_back({NodeLocation::Kind::edge, f, j});
    }
  }
  int interior = 0;
  for (int j = 1; j < k; ++j) {
    for (int i = 1; i + j < k; ++i) {
      nodes_.emplace_back(static_cast<double>(i) / k, static_cast<double>(j) / k);
      locations_.push_back({NodeLocation::Kind::interior, interior++, 0});
    }
  }
  monos_ = monomials_up_to(k);
  const int n = ndof();
  Eigen::MatrixXd vander(n, n);
  for (int i = 0; i < n; ++i) vander.row(i) = tabulate_monomials(monos_, nodes_[i]).value.transpose();
  coeffs_ = vander.fullPivLu().inverse();
}

Eigen::VectorXd LagrangeElement::values(const Vec2& x) const {
  return coeffs_.transpose() * tabulate_monomials(monos_, x).value;
}

Eigen::MatrixX2d LagrangeElement::gradients(const Vec2& x) const {
  auto t = tabulate_monomials(monos_, x);
  Eigen::MatrixX2d g(ndof(), 2);
  g.col(0) = coeffs_.transpose() * t.dx;
  g.col(1) = coeffs_.transpose() * t.dy;
  return g;
}

Eigen::MatrixX3d LagrangeElement::hessians(const Vec2& x) const {
  auto t = tabulate_monomials(monos_, x);
  Eigen::MatrixX3d h(ndof(), 3);
  h.col(0) = coeffs_.transpose() * t.dxx;
  h.col(1) = coeffs_.transpose() * t.dxy;
  h.col(2) = coeffs_.transpose() * t.dyy;
  return h;
}

EnrichmentElement EnrichmentElement::rt0() {
  EnrichmentElement e;
  e.kind_ = ElementKind::rt0_facet;
  e.order_ = 0;
  e.monos_ = monomials_up_to(1);  // 1, x, y
  e.cx_ = Eigen::MatrixXd::Zero(3, 3);
  e.cy_ = Eigen::MatrixXd::Zero(3, 3);
  const Vec2 opposite[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  for (int i = 0; i < 3; ++i) {
    e.cx_(0, i) = -opposite[i].x();
    e.cx_(1, i) = 1.0;
    e.cy_(0, i) = -opposite[i].y();
    e.cy_(2, i) = 1.0;
  }
  e.kernel_x_.resize(3, 0);
  e.kernel_y_.resize(3, 0);
  return e;
}

EnrichmentElement EnrichmentElement::bubble_complement(int r) {
  if (r < 1) throw Error(ErrorCode::invalid_argument, "bubble complement needs r >= 1");
  EnrichmentElement e;
  e.kind_ = ElementKind::rt_bubble_complement;
  e.order_ = r;
  e.monos_ = monomials_up_to(r + 1);
  const int nm = static_cast<int>(e.monos_.size());

  // Spanning set of RT_r = P_r^2 + x * homogeneous P_r.
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> span;
  for (const auto& m : monomials_up_to(r)) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(nm);
    unit(monomial_index(e.monos_, m.px, m.py)) = 1.0;
    span.emplace_back(unit, Eigen::VectorXd::Zero(nm));
    span.emplace_back(Eigen::VectorXd::Zero(nm), unit);
  }
  for (int px = r; px >= 0; --px) {
    const int py = r - px;
    Eigen::VectorXd ux = Eigen::VectorXd::Zero(nm), uy = Eigen::VectorXd::Zero(nm);
    ux(monomial_index(e.monos_, px + 1, py)) = 1.0;
    uy(monomial_index(e.monos_, px, py + 1)) = 1.0;
    span.emplace_back(ux, uy);
  }
  const int nrt = static_cast<int>(span.size());
  Eigen::MatrixXd bx(nm, nrt), by(nm, nrt);
  for (int j = 0; j < nrt; ++j) {
    bx.col(j) = span[j].first;
    by.col(j) = span[j].second;
  }

  // Normal traces are P_r on each facet: r+1 points per facet pin them down.
  const QuadRule edge = edge_rule(2 * r + 1);
  const Vec2 start[3] = {Vec2(1, 0), Vec2(0, 1), Vec2(0, 0)};
  const Vec2 end[3] = {Vec2(0, 1), Vec2(0, 0), Vec2(1, 0)};
  const Vec2 normal[3] = {Vec2(1, 1) / std::sqrt(2.0), Vec2(-1, 0), Vec2(0, -1)};
  Eigen::MatrixXd trace(3 * edge.size(), nrt);
  int row = 0;
  for (int f = 0; f < 3; ++f) {
    for (const auto& p : edge.points) {
      const Vec2 x = start[f] + p.x() * (end[f] - start[f]);
      const Eigen::VectorXd m = tabulate_monomials(e.monos_, x).value;
      trace.row(row++) = normal[f].x() * (m.transpose() * bx) + normal[f].y() * (m.transpose() * by);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> trace_svd(trace, Eigen::ComputeFullV);
  const auto& ts = trace_svd.singularValues();
  int trace_rank = 0;
  for (int i = 0; i < ts.size(); ++i) {
    if (ts(i) > 1e-12 * ts(0)) ++trace_rank;
  }
  const int nint = nrt - trace_rank;
  if (nint != r * (r + 1)) {
    throw Error(ErrorCode::construction_failure,
                "interior bubble space has dimension " + std::to_string(nint) + ", expected " +
                    std::to_string(r * (r + 1)));
  }
  const Eigen::MatrixXd kernel = trace_svd.matrixV().rightCols(nint);
  e.interior_dim_ = nint;

  // Divergence of each interior bubble in monomials of degree <= r.
  const auto target = monomials_up_to(r);
  const int nt = static_cast<int>(target.size());
  Eigen::MatrixXd div_span = Eigen::MatrixXd::Zero(nt, nrt);
  for (int j = 0; j < nrt; ++j) {
    for (int m = 0; m < nm; ++m) {
      const auto& mono = e.monos_[m];
      if (bx(m, j) != 0.0 && mono.px > 0) div_span(monomial_index(target, mono.px - 1, mono.py), j) += mono.px * bx(m, j);
      if (by(m, j) != 0.0 && mono.py > 0) div_span(monomial_index(target, mono.px, mono.py - 1), j) += mono.py * by(m, j);
    }
  }
  // L2(T)-orthonormal modal target basis from the monomial Gram matrix.
  const QuadRule rule = triangle_rule(2 * r);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nt, nt);
  for (int q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd m = tabulate_monomials(target, rule.points[q]).value;
    gram += rule.weights[q] * m * m.transpose();
  }
  const Eigen::MatrixXd lt = gram.llt().matrixU();
  const Eigen::MatrixXd modal = lt * div_span * kernel;
  if (modal.row(0).norm() > 1e-10) {
    throw Error(ErrorCode::construction_failure, "interior bubble with non-zero mean divergence");
  }
  const Eigen::MatrixXd div_map = modal.bottomRows(nt - 1);
  Eigen::JacobiSVD<Eigen::MatrixXd> div_svd(div_map, Eigen::ComputeFullV);
  const auto& ds = div_svd.singularValues();
  int rank = 0;
  for (int i = 0; i < ds.size(); ++i) {
    if (ds(i) > 1e-10) ++rank;
  }
  if (rank != r * (r + 3) / 2) {
    throw Error(ErrorCode::construction_failure, "divergence map has rank " + std::to_string(rank) +
                                                     ", expected " + std::to_string(r * (r + 3) / 2));
  }
  const Eigen::MatrixXd vfull = div_svd.matrixV();
  const Eigen::MatrixXd complement = kernel * vfull.leftCols(rank);
  const Eigen::MatrixXd divfree = kernel * vfull.rightCols(nint - rank);
  e.cx_ = bx * complement;
  e.cy_ = by * complement;
  e.kernel_x_ = bx * divfree;
  e.kernel_y_ = by * divfree;
  e.sigma_min_ = ds(rank - 1);
  e.condition_ = ds(0) / ds(rank - 1);
  return e;
}

Eigen::MatrixX2d EnrichmentElement::values(const Vec2& x) const {
  const Eigen::VectorXd m = tabulate_monomials(monos_, x).value;
  Eigen::MatrixX2d v(ndof(), 2);
  v.col(0) = cx_.transpose() * m;
  v.col(1) = cy_.transpose() * m;
  return v;
}

Eigen::MatrixX4d EnrichmentElement::gradients(const Vec2& x) const {
  auto t = tabulate_monomials(monos_, x);
  Eigen::MatrixX4d g(ndof(), 4);
  g.col(0) = cx_.transpose() * t.dx;
  g.col(1) = cx_.transpose() * t.dy;
  g.col(2) = cy_.transpose() * t.dx;
  g.col(3) = cy_.transpose() * t.dy;
  return g;
}

Eigen::VectorXd EnrichmentElement::divergences(const Vec2& x) const {
  auto t = tabulate_monomials(monos_, x);
  return cx_.transpose() * t.dx + cy_.transpose() * t.dy;
}

PressureElement::PressureElement(int order) : order_(order) {
  if (order < 0) throw Error(ErrorCode::invalid_argument, "pressure order must be >= 0");
  monos_ = monomials_up_to(order);
  const QuadRule rule = triangle_rule(std::max(order, 1));
  means_ = Eigen::VectorXd::Zero(ndof());
  for (int q = 0; q < rule.size(); ++q) {
    means_ += rule.weights[q] * tabulate_monomials(monos_, rule.points[q]).value;
  }
  means_ /= 0.5;
  means_(0) = 0.0;
}

Eigen::VectorXd PressureElement::values(const Vec2& x) const {
  return tabulate_monomials(monos_, x).value - means_;
}

}  // namespace svfem
