#include "svfem/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "svfem/error.hpp"

namespace svfem {

namespace {

using Local = Eigen::VectorXd;

// Per-cell quantity from the physical basis at the points of a rule; cell
// results are summed in cell order.
template <class F>
double integrate_cells(const FESpace& s, int degree, const Vector& u, F&& per_point) {
  const ReferenceTables tables = s.tabulate(triangle_rule(degree));
  const int nc = s.mesh().num_cells();
  std::vector<double> sums(nc, 0.0);
#pragma omp parallel
  {
    CellValues cv;
#pragma omp for schedule(static)
    for (int c = 0; c < nc; ++c) {
      s.cell_values(c, tables, cv);
      const Eigen::VectorXd local = s.gather(u, c);
      double acc = 0.0;
      for (std::size_t q = 0; q < cv.jxw.size(); ++q) acc += cv.jxw[q] * per_point(c, cv, static_cast<int>(q), local);
      sums[c] = acc;
    }
  }
  double total = 0.0;
  for (double v : sums) total += v;
  return total;
}

int n_ct_local(const FESpace& s) { return 2 * s.lagrange().ndof(); }

Vec2 value(const VelocityBasis& b, const Local& local) { return b.value.transpose() * local; }

Eigen::Vector4d grad(const VelocityBasis& b, const Local& local) { return b.grad.transpose() * local; }

Eigen::VectorXd ct_only(const FESpace& s, Eigen::VectorXd local) {
  local.tail(local.size() - n_ct_local(s)).setZero();
  return local;
}

Eigen::VectorXd r_only(const FESpace& s, Eigen::VectorXd local) {
  local.head(n_ct_local(s)).setZero();
  return local;
}

}  // namespace

double kinetic_energy(const FESpace& s, const Vector& u) {
  return 0.5 * integrate_cells(s, 2 * s.order(), u, [&](int, const CellValues& cv, int q, const Local& local) {
           return value(cv.u[q], local).squaredNorm();
         });
}

Momenta momenta(const FESpace& s, const Vector& u) {
  Momenta m;
  for (int i = 0; i < 2; ++i) {
    m.linear(i) = integrate_cells(s, s.order(), u, [&](int, const CellValues& cv, int q, const Local& local) {
      return value(cv.u[q], local)(i);
    });
  }
  m.angular = integrate_cells(s, s.order() + 1, u, [&](int, const CellValues& cv, int q, const Local& local) {
    const Vec2 v = value(cv.u[q], local);
    return v(0) * cv.x[q](1) - v(1) * cv.x[q](0);
  });
  return m;
}

double curl_ct(const FESpace& s, const Vector& u, int cell, const Vec2& ref) {
  const Mat2 g = s.evaluate_gradient(u, cell, ref, Part::ct);
  return g(1, 0) - g(0, 1);
}

double enstrophy(const FESpace& s, const Vector& u) {
  return 0.5 * integrate_cells(s, 2 * s.order(), u, [&](int, const CellValues& cv, int q, const Local& local) {
           const Eigen::Vector4d g = grad(cv.u[q], ct_only(s, local));
           return std::pow(g(2) - g(1), 2);
         });
}

Vector cell_vorticity(const FESpace& s, const Vector& u) {
  const ReferenceTables tables = s.tabulate(triangle_rule(std::max(1, s.order() - 1)));
  Vector out(s.mesh().num_cells());
  CellValues cv;
  for (int c = 0; c < s.mesh().num_cells(); ++c) {
    s.cell_values(c, tables, cv);
    const Eigen::VectorXd local = ct_only(s, s.gather(u, c));
    double acc = 0.0, area = 0.0;
    for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
      const Eigen::Vector4d g = grad(cv.u[q], local);
      acc += cv.jxw[q] * (g(2) - g(1));
      area += cv.jxw[q];
    }
    out(c) = acc / area;
  }
  return out;
}

double line_vorticity(const FESpace& s, const Vector& u, double y) {
  const Mesh& m = s.mesh();
  const QuadRule rule = edge_rule(s.order());
  double total = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto& cell = m.cell(c);
    double xmin = INFINITY, xmax = -INFINITY;
    for (int i = 0; i < 3; ++i) {
      const Vec2& a = m.vertex(cell[i]);
      const Vec2& b = m.vertex(cell[(i + 1) % 3]);
      if ((a(1) - y) * (b(1) - y) > 0.0 || a(1) == b(1)) continue;
      const double x = a(0) + (y - a(1)) / (b(1) - a(1)) * (b(0) - a(0));
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
    if (!(xmax > xmin)) continue;
    const CellGeometry& g = s.geometry(c);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 x(xmin + rule.points[q](0) * (xmax - xmin), y);
      total += rule.weights[q] * (xmax - xmin) * curl_ct(s, u, c, g.pull_back(x));
    }
  }
  return total;
}

ThicknessProbe::ThicknessProbe(const FESpace& s) {
  const Mesh& m = s.mesh();
  const auto box = m.bounding_box();
  for (int j = 1; j <= 1024; ++j) {
    const double y = (1.0 + 2.0 * j) / 2048.0;
    if (y > box[2] && y < box[3]) lines_.push_back(y);
  }
  const QuadRule rule = edge_rule(s.order());
  const int nct = n_ct_local(s);
  const int nl = static_cast<int>(lines_.size());
  std::vector<std::vector<Eigen::Triplet<double>>> rows(nl);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < nl; ++i) {
    const double y = lines_[i];
    for (int c = 0; c < m.num_cells(); ++c) {
      const auto& cell = m.cell(c);
      double xmin = INFINITY, xmax = -INFINITY;
      for (int e = 0; e < 3; ++e) {
        const Vec2& a = m.vertex(cell[e]);
        const Vec2& b = m.vertex(cell[(e + 1) % 3]);
        if ((a(1) - y) * (b(1) - y) > 0.0 || a(1) == b(1)) continue;
        const double x = a(0) + (y - a(1)) / (b(1) - a(1)) * (b(0) - a(0));
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
      }
      if (!(xmax > xmin)) continue;
      const auto dofs = s.cell_velocity_dofs(c);
      for (int q = 0; q < rule.size(); ++q) {
        const Vec2 x(xmin + rule.points[q](0) * (xmax - xmin), y);
        const VelocityBasis b = s.velocity_basis(c, s.geometry(c).pull_back(x));
        const double w = rule.weights[q] * (xmax - xmin);
        for (int k = 0; k < nct; ++k) {
          if (dofs[k] >= 0) rows[i].emplace_back(i, dofs[k], w * (b.grad(k, 2) - b.grad(k, 1)));
        }
      }
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& r : rows) trip.insert(trip.end(), r.begin(), r.end());
  op_.resize(nl, s.n_u());
  op_.setFromTriplets(trip.begin(), trip.end());
}

double ThicknessProbe::operator()(const Vector& u, double u_inf) const {
  const double peak = op_.rows() > 0 ? (op_ * u).cwiseAbs().maxCoeff() : 0.0;
  // round-off curl of a uniform flow counts as zero
  if (peak <= 1e-12 * std::abs(u_inf)) return std::numeric_limits<double>::infinity();
  return 2.0 * u_inf / peak;
}

double vorticity_thickness(const FESpace& s, const Vector& u, double u_inf) { return ThicknessProbe(s)(u, u_inf); }

double divergence_norm(const FESpace& s, const Vector& u) {
  return std::sqrt(integrate_cells(s, 2 * s.order(), u, [&](int, const CellValues& cv, int q, const Local& local) {
    return std::pow(cv.u[q].div.dot(local), 2);
  }));
}

double gradient_norm(const FESpace& s, const Vector& u) {
  return std::sqrt(integrate_cells(s, 2 * s.order(), u, [&](int, const CellValues& cv, int q, const Local& local) {
    return grad(cv.u[q], ct_only(s, local)).squaredNorm();
  }));
}

double mass_residual(const FESpace& s, const Vector& u) {
  return divergence_norm(s, u) / (1.0 + gradient_norm(s, u));
}

double mass_residual(const FormContext& ctx, const Vector& u) {
  const FESpace& s = *ctx.space;
  const std::vector<CellValues>* cached = cached_cell_values(ctx, 2 * s.order());
  if (!cached) return mass_residual(s, u);
  const int nc = s.mesh().num_cells();
  std::vector<Eigen::Vector2d> sums(nc);
#pragma omp parallel for schedule(static) if (ctx.execution == Execution::parallel)
  for (int c = 0; c < nc; ++c) {
    const CellValues& cv = (*cached)[c];
    const Local local = s.gather(u, c);
    const Local ct = ct_only(s, local);
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
      acc += cv.jxw[q] * Eigen::Vector2d(std::pow(cv.u[q].div.dot(local), 2), grad(cv.u[q], ct).squaredNorm());
    }
    sums[c] = acc;
  }
  Eigen::Vector2d total = Eigen::Vector2d::Zero();
  for (const auto& v : sums) total += v;
  return std::sqrt(total(0)) / (1.0 + std::sqrt(total(1)));
}

Vector cell_divergence(const FESpace& s, const Vector& u) {
  const ReferenceTables tables = s.tabulate(triangle_rule(std::max(1, s.order() - 1)));
  Vector out(s.mesh().num_cells());
  CellValues cv;
  for (int c = 0; c < s.mesh().num_cells(); ++c) {
    s.cell_values(c, tables, cv);
    const Eigen::VectorXd local = s.gather(u, c);
    double acc = 0.0, area = 0.0;
    for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
      acc += cv.jxw[q] * cv.u[q].div.dot(local);
      area += cv.jxw[q];
    }
    out(c) = acc / area;
  }
  return out;
}

Vector cell_pressure(const FESpace& s, const Vector& p) {
  // the constant mode comes first and the others have zero mean
  Vector out(s.mesh().num_cells());
  const double c0 = s.pressure().values(Vec2(1.0 / 3.0, 1.0 / 3.0))(0);
  for (int c = 0; c < s.mesh().num_cells(); ++c) out(c) = p(s.pressure_dof(c, 0)) * c0;
  return out;
}

double l2_error(const FESpace& s, const Vector& u, const VectorFunction& exact, double t) {
  return std::sqrt(integrate_cells(s, s.order() * 2 + 4, u, [&](int, const CellValues& cv, int q, const Local& local) {
    return (exact(t, cv.x[q]) - value(cv.u[q], local)).squaredNorm();
  }));
}

double h1_semi_error(const FESpace& s, const Vector& u, const GradientFunction& exact, double t) {
  return std::sqrt(integrate_cells(s, s.order() * 2 + 4, u, [&](int, const CellValues& cv, int q, const Local& local) {
    const Eigen::Vector4d g = grad(cv.u[q], ct_only(s, local));
    const Mat2 e = exact(t, cv.x[q]);
    return std::pow(e(0, 0) - g(0), 2) + std::pow(e(0, 1) - g(1), 2) + std::pow(e(1, 0) - g(2), 2) +
           std::pow(e(1, 1) - g(3), 2);
  }));
}

double weighted_enrichment_divergence(const FESpace& s, const Vector& u) {
  return integrate_cells(s, 2 * s.order(), u, [&](int c, const CellValues& cv, int q, const Local& local) {
    return s.geometry(c).h * std::pow(cv.u[q].div.dot(r_only(s, local)), 2);
  });
}

ErrorAccumulator::ErrorAccumulator(const FESpace& space, VectorFunction exact, GradientFunction exact_grad, double nu,
                                   StarTerm term)
    : space_(space), ctx_(space), exact_(std::move(exact)), grad_(std::move(exact_grad)), nu_(nu), term_(term) {
  ctx_.enable_cache();
}

double ErrorAccumulator::scheme_integrand(const Vector& u) const {
  switch (term_) {
    case StarTerm::S2: return weighted_enrichment_divergence(space_, u);
    case StarTerm::upwind: return assemble_c_uw(ctx_, u).bilinear(u, u);
    default: return 0.0;
  }
}

void ErrorAccumulator::add(double t, const Vector& u) {
  // L2 and H1 errors share one pass over the cells
  const FESpace& s = space_;
  const std::vector<CellValues>& values = *cached_cell_values(ctx_, s.order() * 2 + 4);
  const int nc = s.mesh().num_cells();
  std::vector<Eigen::Vector2d> sums(nc);
#pragma omp parallel for schedule(static) if (ctx_.execution == Execution::parallel)
  for (int c = 0; c < nc; ++c) {
    const CellValues& cv = values[c];
    const Local local = s.gather(u, c);
    const Local ct = ct_only(s, local);
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (std::size_t q = 0; q < cv.jxw.size(); ++q) {
      const Eigen::Vector4d g = grad(cv.u[q], ct);
      const Mat2 ge = grad_(t, cv.x[q]);
      const double h1 = std::pow(ge(0, 0) - g(0), 2) + std::pow(ge(0, 1) - g(1), 2) +
                        std::pow(ge(1, 0) - g(2), 2) + std::pow(ge(1, 1) - g(3), 2);
      acc += cv.jxw[q] * Eigen::Vector2d((exact_(t, cv.x[q]) - value(cv.u[q], local)).squaredNorm(), h1);
    }
    sums[c] = acc;
  }
  Eigen::Vector2d total = Eigen::Vector2d::Zero();
  for (const auto& v : sums) total += v;
  linf_ = std::max(linf_, std::sqrt(total(0)));
  const double integrand = nu_ * total(1) + scheme_integrand(u);
  if (started_) integral_ += 0.5 * (t - last_t_) * (integrand + last_integrand_);
  started_ = true;
  last_t_ = t;
  last_integrand_ = integrand;
  if (term_ == StarTerm::S1) {
    if (s1_.size() == 0) s1_ = assemble_S(ctx_, Stabilization::S1).matrix();
    final_r_ = u.dot(s1_ * u);
  }
}

double ErrorAccumulator::star_norm() const { return std::sqrt(linf_ * linf_ + integral_ + final_r_); }

TimeSeries::TimeSeries(std::string label, std::vector<std::string> columns)
    : label_(std::move(label)), columns_(std::move(columns)) {}

void TimeSeries::push(double t, std::vector<double> values) {
  if (!times_.empty() && !(t > times_.back())) {
    throw Error(ErrorCode::invalid_argument, "time series '" + label_ + "' needs increasing times");
  }
  if (values.size() != columns_.size()) {
    throw Error(ErrorCode::invalid_argument, "time series '" + label_ + "' expects " +
                                                 std::to_string(columns_.size()) + " values");
  }
  times_.push_back(t);
  values_.push_back(std::move(values));
}

void TimeSeries::write_csv(std::ostream& out) const {
  out << "t";
  for (const auto& c : columns_) out << "," << c;
  out << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < times_.size(); ++i) {
    out << times_[i];
    for (double v : values_[i]) out << "," << v;
    out << "\n";
  }
}

void TimeSeries::write_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  write_csv(out);
}

}  // namespace svfem
